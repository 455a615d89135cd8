//! Probabilistic disclosure analysis for labeled Markov decision processes.
//!
//! A labeled MDP emits a symbol on every transition; an observer watches the
//! process through a projection that erases some states and steps.  A secret
//! is an omega-regular set of runs.  A run *discloses* the secret when every
//! run carrying the same observation also lies in the secret, so the observer
//! can be certain.  This crate computes the maximal probability of disclosure
//! over schedulers, decides the associated threshold and almost-sure
//! questions, and handles the qualitative fragment that stays decidable when
//! the scheduler itself only sees observations.
//!
//! Everything quantitative is computed in exact rational arithmetic; floating
//! point appears only in the optional iterative value engine.

pub mod automata;
pub mod disclosure;
pub mod gadgets;
pub mod model;
pub mod observation;
pub mod solve_mdp;
pub mod solve_pomdp;

mod linalg;
mod ratio;

pub use ratio::{format_ratio, parse_ratio};

use thiserror::Error;

/// One validation finding: where it was detected and what is wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted path into the offending object, e.g. `transitions[q0][alpha1]`.
    pub at: String,
    /// Human-readable description of the violation.
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.at, self.message)
    }
}

/// Errors surfaced by the analysis layers.
///
/// The split mirrors the process exit codes: validation problems (bad files,
/// malformed models, ill-typed queries), queries that no algorithm can answer
/// because the underlying problem is undecidable, and resource caps.
#[derive(Debug, Error)]
pub enum Error {
    /// Input could not be parsed at all.
    #[error("parse error: {0}")]
    Parse(String),
    /// Input parsed but violates a structural invariant.
    #[error("validation failed:\n{}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    /// Input is fine but the query is misapplied (wrong alphabet, unknown
    /// state, partial automaton where a complete one is required, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The query is unsupported because the general problem admits no
    /// algorithm; the message states the blocking fact.
    #[error("unsupported query: {0}")]
    Unsupported(String),
    /// A configured size cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

fn format_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(|d| format!("  - {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Shorthand result type used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
