//! The JSON model file format.
//!
//! ```json
//! {
//!   "states": ["q0", "q1"],
//!   "labels": ["a"],
//!   "actions": ["go"],
//!   "initial": "q0",
//!   "transitions": [
//!     {"from": "q0", "action": "go",
//!      "dist": [{"label": "a", "to": "q1", "prob": "1/2"},
//!               {"label": "a", "to": "q0", "prob": "1/2"}]}
//!   ],
//!   "equivalence": [["q0"], ["q1"]],
//!   "projection": {"observables": ["o"],
//!                  "states": {"q1": "o"},
//!                  "steps": {"go,a": ""}}
//! }
//! ```
//!
//! Probabilities are strings `"p/q"` (or integers `"p"`).  `equivalence` and
//! `projection` are optional; omitted projection entries mean the symbol is
//! unobservable, as does the empty string.  Unknown fields anywhere are
//! rejected.  Printing is canonical (sorted name tables, reduced fractions),
//! so print-parse round-trips reproduce the model exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{LabeledMdp, Pomdp};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    states: Vec<String>,
    labels: Vec<String>,
    actions: Vec<String>,
    initial: serde_json::Value,
    transitions: Vec<RowFile>,
    #[serde(default)]
    equivalence: Option<Vec<Vec<String>>>,
    #[serde(default)]
    projection: Option<ProjectionFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowFile {
    from: String,
    action: String,
    dist: Vec<OutcomeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeFile {
    label: String,
    to: String,
    prob: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectionFile {
    observables: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    states: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    steps: BTreeMap<String, String>,
}

/// Projection maps exactly as written in the file; the observation module
/// resolves them against a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawProjection {
    pub observables: Vec<String>,
    /// State name -> observable; missing or empty means unobservable.
    pub state_map: BTreeMap<String, String>,
    /// "action,label" -> observable; missing or empty means unobservable.
    pub step_map: BTreeMap<String, String>,
}

/// A parsed model file: the model with its (possibly identity) equivalence,
/// and the optional projection block.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub pomdp: Pomdp,
    /// Whether the file carried an explicit `equivalence` block.
    pub had_equivalence: bool,
    pub projection: Option<RawProjection>,
}

impl ParsedModel {
    pub fn mdp(&self) -> &LabeledMdp {
        self.pomdp.mdp()
    }
}

/// Parses a model file, reporting positions for syntax errors and precise
/// messages for structural ones.  Semantic validation (distribution sums,
/// deadlocks, equivalence observability) stays separate so that a caller can
/// collect those diagnostics in full.
pub fn parse_model(text: &str) -> Result<ParsedModel> {
    let file: ModelFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("model file: {e}")))?;
    let initial = match &file.initial {
        serde_json::Value::String(s) => s.clone(),
        _ => {
            return Err(Error::Parse(
                "model file: \"initial\" must be a single state name; \
                 initial distributions are not supported — add an explicit \
                 start state that branches to the intended distribution"
                    .into(),
            ))
        }
    };
    let mut transitions = Vec::with_capacity(file.transitions.len());
    for row in file.transitions {
        let mut dist = Vec::with_capacity(row.dist.len());
        for o in row.dist {
            let p = crate::parse_ratio(&o.prob)?;
            dist.push((o.label, o.to, p));
        }
        transitions.push((row.from, row.action, dist));
    }
    let mdp = LabeledMdp::new(file.states, file.labels, file.actions, &initial, transitions)?;
    let had_equivalence = file.equivalence.is_some();
    let pomdp = match file.equivalence {
        Some(classes) => Pomdp::new(mdp, classes)?,
        None => Pomdp::perfect(mdp),
    };
    let projection = file.projection.map(|p| RawProjection {
        observables: p.observables,
        state_map: p.states,
        step_map: p.steps,
    });
    Ok(ParsedModel { pomdp, had_equivalence, projection })
}

/// Prints a model file in canonical form: sorted name tables, transitions in
/// index order, probabilities as reduced fractions.
pub fn print_model(parsed: &ParsedModel) -> String {
    #[derive(Serialize)]
    struct Canonical<'a> {
        states: &'a [String],
        labels: &'a [String],
        actions: &'a [String],
        initial: &'a str,
        transitions: Vec<RowFile>,
        #[serde(skip_serializing_if = "Option::is_none")]
        equivalence: Option<Vec<Vec<&'a str>>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        projection: Option<ProjectionFile>,
    }
    let mdp = parsed.mdp();
    let mut transitions = Vec::new();
    for q in 0..mdp.state_count() {
        for row in mdp.rows(q) {
            transitions.push(RowFile {
                from: mdp.state_name(q).to_string(),
                action: mdp.action_name(row.action).to_string(),
                dist: row
                    .dist
                    .iter()
                    .map(|(l, t, p)| OutcomeFile {
                        label: mdp.label_name(*l).to_string(),
                        to: mdp.state_name(*t).to_string(),
                        prob: crate::format_ratio(p),
                    })
                    .collect(),
            });
        }
    }
    let equivalence = if parsed.had_equivalence {
        Some(
            parsed
                .pomdp
                .classes()
                .iter()
                .map(|c| c.iter().map(|&q| mdp.state_name(q)).collect())
                .collect(),
        )
    } else {
        None
    };
    let projection = parsed.projection.as_ref().map(|p| ProjectionFile {
        observables: p.observables.clone(),
        states: p.state_map.clone(),
        steps: p.step_map.clone(),
    });
    let canonical = Canonical {
        states: mdp.state_names(),
        labels: mdp.label_names(),
        actions: mdp.action_names(),
        initial: mdp.state_name(mdp.initial()),
        transitions,
        equivalence,
        projection,
    };
    let mut out = serde_json::to_string_pretty(&canonical).expect("model serialization");
    out.push('\n');
    out
}
