//! Text format for omega-automata (HOA v1 subset).
//!
//! Atomic propositions are one-hot encodings of alphabet symbols: an AP
//! string `state:<name>` denotes a model-state symbol, `step:<action>,<label>`
//! a step symbol, and anything else a plain letter.  Every edge label is a
//! boolean formula over AP indices; it matches exactly the symbols whose
//! one-hot assignment satisfies it.  Supported acceptance names are Buchi,
//! co-Buchi, and parity min even.  Parsing accepts state-based and
//! transition-based acceptance and nondeterminism; printing always uses
//! state-based acceptance for deterministic automata and transition marks
//! for nondeterministic ones.

use std::collections::BTreeMap;

use super::{
    Acceptance, Alphabet, DetOmegaAutomaton, MarkKind, NTrans, NondetOmegaAutomaton, Sym,
};
use crate::{Error, Result};

/// A parsed automaton: deterministic with state-based acceptance whenever
/// the input allows it, nondeterministic with transition marks otherwise.
#[derive(Debug, Clone)]
pub enum HoaAutomaton {
    Det(DetOmegaAutomaton),
    Nondet(NondetOmegaAutomaton),
}

impl HoaAutomaton {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            HoaAutomaton::Det(a) => &a.alphabet,
            HoaAutomaton::Nondet(a) => &a.alphabet,
        }
    }

    pub fn state_count(&self) -> usize {
        match self {
            HoaAutomaton::Det(a) => a.state_count(),
            HoaAutomaton::Nondet(a) => a.state_count(),
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    /// `Ident:` — a header name including the colon.
    Header(String),
    Ident(String),
    Str(String),
    Int(u32),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Amp,
    Pipe,
    Bang,
    Body,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let err = |line: usize, msg: &str| Error::Parse(format!("line {line}: {msg}"));
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.peek() != Some(&'*') {
                    return Err(err(line, "stray '/'"));
                }
                chars.next();
                // Comments nest.
                let mut depth = 1usize;
                let mut prev = ' ';
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                    }
                    if prev == '/' && c == '*' {
                        depth += 1;
                        prev = ' ';
                    } else if prev == '*' && c == '/' {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                        prev = ' ';
                    } else {
                        prev = c;
                    }
                }
                if depth != 0 {
                    return Err(err(line, "unterminated comment"));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e) => s.push(e),
                            None => return Err(err(line, "unterminated string")),
                        },
                        Some('\n') => return Err(err(line, "newline in string")),
                        Some(c) => s.push(c),
                        None => return Err(err(line, "unterminated string")),
                    }
                }
                toks.push((Tok::Str(s), line));
            }
            '-' => {
                // --BODY-- or --END--
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c == '-' || c.is_ascii_alphabetic() {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "--BODY--" => toks.push((Tok::Body, line)),
                    "--END--" => toks.push((Tok::End, line)),
                    "--ABORT--" => return Err(err(line, "input marked aborted")),
                    other => return Err(err(line, &format!("unexpected token '{other}'"))),
                }
            }
            '0'..='9' => {
                let mut v: u32 = 0;
                while let Some(c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(c.to_digit(10).unwrap()))
                        .ok_or_else(|| err(line, "integer too large"))?;
                    chars.next();
                }
                toks.push((Tok::Int(v), line));
            }
            '[' => {
                chars.next();
                toks.push((Tok::LBracket, line));
            }
            ']' => {
                chars.next();
                toks.push((Tok::RBracket, line));
            }
            '{' => {
                chars.next();
                toks.push((Tok::LBrace, line));
            }
            '}' => {
                chars.next();
                toks.push((Tok::RBrace, line));
            }
            '(' => {
                chars.next();
                toks.push((Tok::LParen, line));
            }
            ')' => {
                chars.next();
                toks.push((Tok::RParen, line));
            }
            '&' => {
                chars.next();
                toks.push((Tok::Amp, line));
            }
            '|' => {
                chars.next();
                toks.push((Tok::Pipe, line));
            }
            '!' => {
                chars.next();
                toks.push((Tok::Bang, line));
            }
            c if c.is_ascii_alphabetic() || c == '_' || c == '@' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '@' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if chars.peek() == Some(&':') {
                    chars.next();
                    toks.push((Tok::Header(s), line));
                } else {
                    toks.push((Tok::Ident(s), line));
                }
            }
            other => return Err(err(line, &format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Label formulas
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum BExpr {
    Const(bool),
    Ap(u32),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
}

impl BExpr {
    /// Evaluates under the one-hot assignment where exactly AP `hot` holds.
    fn eval(&self, hot: u32) -> bool {
        match self {
            BExpr::Const(b) => *b,
            BExpr::Ap(i) => *i == hot,
            BExpr::Not(e) => !e.eval(hot),
            BExpr::And(a, b) => a.eval(hot) && b.eval(hot),
            BExpr::Or(a, b) => a.eval(hot) || b.eval(hot),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|&(_, l)| l)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("line {}: {msg}", self.line())))
    }

    fn expect_int(&mut self, what: &str) -> Result<u32> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            _ => {
                self.pos -= 1;
                self.fail(&format!("expected {what}"))
            }
        }
    }

    fn expect_str(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Str(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                self.fail(&format!("expected {what}"))
            }
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                self.fail(&format!("expected {what}"))
            }
        }
    }

    fn parse_or(&mut self, ap_count: u32) -> Result<BExpr> {
        let mut e = self.parse_and(ap_count)?;
        while self.peek() == Some(&Tok::Pipe) {
            self.next();
            let rhs = self.parse_and(ap_count)?;
            e = BExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_and(&mut self, ap_count: u32) -> Result<BExpr> {
        let mut e = self.parse_atom(ap_count)?;
        while self.peek() == Some(&Tok::Amp) {
            self.next();
            let rhs = self.parse_atom(ap_count)?;
            e = BExpr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_atom(&mut self, ap_count: u32) -> Result<BExpr> {
        match self.next() {
            Some(Tok::Bang) => Ok(BExpr::Not(Box::new(self.parse_atom(ap_count)?))),
            Some(Tok::LParen) => {
                let e = self.parse_or(ap_count)?;
                if self.next() != Some(Tok::RParen) {
                    self.pos -= 1;
                    return self.fail("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Int(i)) if i < ap_count => Ok(BExpr::Ap(i)),
            Some(Tok::Int(_)) => {
                self.pos -= 1;
                self.fail("AP index out of range in label")
            }
            Some(Tok::Ident(s)) if s == "t" => Ok(BExpr::Const(true)),
            Some(Tok::Ident(s)) if s == "f" => Ok(BExpr::Const(false)),
            _ => {
                self.pos -= 1;
                self.fail("expected a label atom")
            }
        }
    }

    fn parse_acc_sets(&mut self) -> Result<Vec<u32>> {
        // Caller saw '{'.
        let mut sets = Vec::new();
        loop {
            match self.next() {
                Some(Tok::RBrace) => return Ok(sets),
                Some(Tok::Int(v)) => sets.push(v),
                _ => {
                    self.pos -= 1;
                    return self.fail("expected acceptance set index or '}'");
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AccName {
    Buchi,
    CoBuchi,
    ParityMinEven(u32),
}

struct RawState {
    name: Option<String>,
    sets: Vec<u32>,
    edges: Vec<(BExpr, usize, Vec<u32>)>,
    defined: bool,
}

/// Parses the text of an automaton file.
pub fn parse_hoa(text: &str) -> Result<HoaAutomaton> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    match p.next() {
        Some(Tok::Header(h)) if h == "HOA" => {}
        _ => return Err(Error::Parse("input does not start with an automaton header".into())),
    }
    let version = p.expect_ident("format version")?;
    if version != "v1" {
        return Err(Error::Unsupported(format!("automaton format version {version}")));
    }
    let mut declared_states: Option<u32> = None;
    let mut starts: Vec<u32> = Vec::new();
    let mut aps: Option<Vec<String>> = None;
    let mut acc_name: Option<AccName> = None;
    let mut acc_count: Option<u32> = None;
    loop {
        match p.next() {
            Some(Tok::Body) => break,
            Some(Tok::Header(h)) => match h.as_str() {
                "States" => declared_states = Some(p.expect_int("state count")?),
                "Start" => {
                    starts.push(p.expect_int("initial state")?);
                    if p.peek() == Some(&Tok::Amp) {
                        return p.fail("conjunctions of initial states are not supported");
                    }
                }
                "AP" => {
                    let k = p.expect_int("AP count")?;
                    let mut list = Vec::with_capacity(k as usize);
                    for _ in 0..k {
                        list.push(p.expect_str("AP string")?);
                    }
                    aps = Some(list);
                }
                "acc-name" => {
                    let name = p.expect_ident("acceptance name")?;
                    acc_name = Some(match name.as_str() {
                        "Buchi" => AccName::Buchi,
                        "co-Buchi" => AccName::CoBuchi,
                        "parity" => {
                            let kind = p.expect_ident("parity kind")?;
                            let pol = p.expect_ident("parity polarity")?;
                            let k = p.expect_int("parity set count")?;
                            if kind != "min" || pol != "even" {
                                return Err(Error::Unsupported(format!(
                                    "parity {kind} {pol} acceptance (only min even)"
                                )));
                            }
                            AccName::ParityMinEven(k)
                        }
                        other => {
                            return Err(Error::Unsupported(format!("acceptance name {other}")))
                        }
                    });
                }
                "Acceptance" => {
                    acc_count = Some(p.expect_int("acceptance set count")?);
                    // The formula itself is implied by acc-name; skip it.
                    while !matches!(p.peek(), Some(Tok::Header(_)) | Some(Tok::Body) | None) {
                        p.next();
                    }
                }
                "Alias" => return Err(Error::Unsupported("label aliases".into())),
                // Lower-case headers carry no semantics we must honor.
                other if other.starts_with(|c: char| c.is_lowercase()) => {
                    while !matches!(p.peek(), Some(Tok::Header(_)) | Some(Tok::Body) | None) {
                        p.next();
                    }
                }
                other => {
                    return Err(Error::Unsupported(format!("semantic header {other}:")));
                }
            },
            _ => return p.fail("expected a header or the body marker"),
        }
    }
    let aps = aps.ok_or_else(|| Error::Parse("missing AP: header".into()))?;
    let acc_name = acc_name.ok_or_else(|| {
        Error::Unsupported("automaton without an acc-name header".into())
    })?;
    let expected_sets = match acc_name {
        AccName::Buchi | AccName::CoBuchi => 1,
        AccName::ParityMinEven(k) => k,
    };
    if let Some(c) = acc_count {
        if c != expected_sets {
            return Err(Error::Parse(format!(
                "Acceptance: declares {c} sets but acc-name implies {expected_sets}"
            )));
        }
    }
    if starts.is_empty() {
        return Err(Error::Parse("missing Start: header".into()));
    }
    let ap_count = aps.len() as u32;

    // Body.
    let mut raw: BTreeMap<u32, RawState> = BTreeMap::new();
    let mut current: Option<u32> = None;
    let mut max_index: u32 = starts.iter().copied().max().unwrap_or(0);
    loop {
        match p.next() {
            Some(Tok::End) => break,
            Some(Tok::Header(h)) if h == "State" => {
                if p.peek() == Some(&Tok::LBracket) {
                    return p.fail("state labels are not supported");
                }
                let idx = p.expect_int("state index")?;
                let name = match p.peek() {
                    Some(Tok::Str(_)) => match p.next() {
                        Some(Tok::Str(s)) => Some(s),
                        _ => unreachable!(),
                    },
                    _ => None,
                };
                let sets = if p.peek() == Some(&Tok::LBrace) {
                    p.next();
                    p.parse_acc_sets()?
                } else {
                    Vec::new()
                };
                let entry = raw.entry(idx).or_insert_with(|| RawState {
                    name: None,
                    sets: Vec::new(),
                    edges: Vec::new(),
                    defined: false,
                });
                if entry.defined {
                    return p.fail(&format!("state {idx} defined twice"));
                }
                entry.defined = true;
                entry.name = name;
                entry.sets = sets;
                max_index = max_index.max(idx);
                current = Some(idx);
            }
            Some(Tok::LBracket) => {
                let Some(cur) = current else {
                    return p.fail("edge before any state definition");
                };
                let expr = p.parse_or(ap_count)?;
                if p.next() != Some(Tok::RBracket) {
                    self_fail(&mut p, "expected ']'")?;
                }
                let target = p.expect_int("edge target")?;
                if p.peek() == Some(&Tok::Amp) {
                    return p.fail("conjunctions of edge targets are not supported");
                }
                let sets = if p.peek() == Some(&Tok::LBrace) {
                    p.next();
                    p.parse_acc_sets()?
                } else {
                    Vec::new()
                };
                max_index = max_index.max(target);
                raw.get_mut(&cur).unwrap().edges.push((expr, target as usize, sets));
            }
            Some(Tok::Int(_)) => {
                return p.fail("edges must carry an explicit [label]");
            }
            _ => return p.fail("expected 'State:', an edge, or the end marker"),
        }
    }
    let n = match declared_states {
        Some(k) => {
            if max_index >= k {
                return Err(Error::Parse(format!(
                    "state index {max_index} exceeds declared count {k}"
                )));
            }
            k
        }
        None => max_index + 1,
    };
    for i in 0..n {
        if !raw.get(&i).map(|r| r.defined).unwrap_or(false) {
            return Err(Error::Parse(format!("state {i} is never defined")));
        }
    }
    for r in raw.values() {
        for s in r.sets.iter().chain(r.edges.iter().flat_map(|(_, _, s)| s.iter())) {
            if *s >= expected_sets {
                return Err(Error::Parse(format!(
                    "acceptance set {s} out of range (automaton declares {expected_sets})"
                )));
            }
        }
    }

    // Build the alphabet from the AP strings.
    let mut syms = Vec::with_capacity(aps.len());
    for ap in &aps {
        if let Some(rest) = ap.strip_prefix("state:") {
            syms.push(Sym::State(rest.to_string()));
        } else if let Some(rest) = ap.strip_prefix("step:") {
            let Some((action, label)) = rest.split_once(',') else {
                return Err(Error::Parse(format!(
                    "step proposition '{ap}' needs the form step:<action>,<label>"
                )));
            };
            syms.push(Sym::Step(action.to_string(), label.to_string()));
        } else {
            syms.push(Sym::Letter(ap.clone()));
        }
    }
    let alphabet = Alphabet::new(syms)?;

    // Expand label formulas symbol by symbol.
    let n = n as usize;
    let mut expanded: Vec<Vec<(usize, usize, Vec<u32>)>> = vec![Vec::new(); n];
    let mut deterministic = starts.len() == 1;
    let mut transition_acc = false;
    for (idx, r) in &raw {
        let mut per_symbol: Vec<u8> = vec![0; alphabet.len()];
        for (expr, target, sets) in &r.edges {
            if !sets.is_empty() {
                transition_acc = true;
            }
            for sym in 0..alphabet.len() {
                if expr.eval(sym as u32) {
                    per_symbol[sym] += 1;
                    expanded[*idx as usize].push((sym, *target, sets.clone()));
                }
            }
        }
        if per_symbol.iter().any(|&c| c > 1) {
            deterministic = false;
        }
    }
    let names: Vec<String> = (0..n)
        .map(|i| {
            raw.get(&(i as u32))
                .and_then(|r| r.name.clone())
                .unwrap_or_else(|| format!("s{i}"))
        })
        .collect();

    if deterministic && !transition_acc {
        let mut trans: Vec<Vec<Option<usize>>> = vec![vec![None; alphabet.len()]; n];
        for (q, edges) in expanded.iter().enumerate() {
            for (sym, target, _) in edges {
                trans[q][*sym] = Some(*target);
            }
        }
        let acceptance = match acc_name {
            AccName::Buchi => {
                Acceptance::Buchi((0..n).map(|i| raw[&(i as u32)].sets.contains(&0)).collect())
            }
            AccName::CoBuchi => {
                Acceptance::CoBuchi((0..n).map(|i| raw[&(i as u32)].sets.contains(&0)).collect())
            }
            AccName::ParityMinEven(_) => {
                let mut prio = Vec::with_capacity(n);
                for i in 0..n {
                    let sets = &raw[&(i as u32)].sets;
                    if sets.len() != 1 {
                        return Err(Error::Parse(format!(
                            "parity state {i} must belong to exactly one acceptance set"
                        )));
                    }
                    prio.push(sets[0]);
                }
                Acceptance::Parity(prio)
            }
        };
        return Ok(HoaAutomaton::Det(DetOmegaAutomaton::new(
            alphabet,
            names,
            starts[0] as usize,
            trans,
            acceptance,
        )?));
    }

    // Nondeterministic (or transition-based) automaton: fold state sets into
    // the marks of incoming transitions.
    let kind = match acc_name {
        AccName::Buchi => MarkKind::Buchi,
        AccName::CoBuchi => MarkKind::CoBuchi,
        AccName::ParityMinEven(_) => MarkKind::Parity,
    };
    let mut trans: Vec<Vec<NTrans>> = vec![Vec::new(); n];
    for (q, edges) in expanded.iter().enumerate() {
        for (sym, target, sets) in edges {
            let state_sets = &raw[&(*target as u32)].sets;
            let mark = match kind {
                MarkKind::Buchi | MarkKind::CoBuchi => {
                    (sets.contains(&0) || state_sets.contains(&0)).then_some(0)
                }
                MarkKind::Parity => {
                    // The minimum priority attached to crossing this edge:
                    // the edge's own set or the target state's set.
                    match sets.iter().chain(state_sets.iter()).min() {
                        Some(&m) => Some(m),
                        None => {
                            return Err(Error::Parse(format!(
                                "parity transition {q}->{target} carries no priority"
                            )))
                        }
                    }
                }
            };
            trans[q].push(NTrans { symbol: *sym, target: *target, mark });
        }
    }
    Ok(HoaAutomaton::Nondet(NondetOmegaAutomaton::new(
        alphabet,
        names,
        starts.iter().map(|&s| s as usize).collect(),
        trans,
        kind,
    )?))
}

// Small helper because closures cannot early-return from the parser loop.
fn self_fail(p: &mut Parser, msg: &str) -> Result<()> {
    p.pos -= 1;
    p.fail(msg)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn ap_string(sym: &Sym) -> String {
    match sym {
        Sym::State(q) => format!("state:{q}"),
        Sym::Step(a, l) => format!("step:{a},{l}"),
        Sym::Letter(x) => x.clone(),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn one_hot_label(sym: usize, ap_count: usize) -> String {
    let mut parts = Vec::with_capacity(ap_count);
    for i in 0..ap_count {
        if i == sym {
            parts.push(format!("{i}"));
        } else {
            parts.push(format!("!{i}"));
        }
    }
    format!("[{}]", parts.join(" & "))
}

fn parity_formula(k: u32) -> String {
    // Nested min-even formula: Inf(0) | (Fin(1) & (Inf(2) | ...)).
    let mut expr = {
        let last = k - 1;
        if last % 2 == 0 {
            format!("Inf({last})")
        } else {
            format!("Fin({last})")
        }
    };
    for i in (0..k - 1).rev() {
        expr = if i % 2 == 0 {
            format!("Inf({i}) | ({expr})")
        } else {
            format!("Fin({i}) & ({expr})")
        };
    }
    expr
}

fn acceptance_header(out: &mut String, kind: &str, sets: u32, formula: &str) {
    out.push_str(&format!("acc-name: {kind}\n"));
    out.push_str(&format!("Acceptance: {sets} {formula}\n"));
}

/// Prints an automaton in the text format accepted by [`parse_hoa`].
pub fn print_hoa(aut: &HoaAutomaton) -> String {
    let mut out = String::new();
    out.push_str("HOA: v1\n");
    let alphabet = aut.alphabet();
    match aut {
        HoaAutomaton::Det(a) => {
            out.push_str(&format!("States: {}\n", a.state_count()));
            out.push_str(&format!("Start: {}\n", a.initial()));
            out.push_str(&format!("AP: {}", alphabet.len()));
            for sym in alphabet.syms() {
                out.push(' ');
                out.push_str(&quote(&ap_string(sym)));
            }
            out.push('\n');
            match a.acceptance() {
                Acceptance::Buchi(_) => acceptance_header(&mut out, "Buchi", 1, "Inf(0)"),
                Acceptance::CoBuchi(_) => acceptance_header(&mut out, "co-Buchi", 1, "Fin(0)"),
                Acceptance::Parity(prio) => {
                    let k = prio.iter().copied().max().unwrap_or(0) + 1;
                    acceptance_header(
                        &mut out,
                        &format!("parity min even {k}"),
                        k,
                        &parity_formula(k),
                    );
                }
            }
            out.push_str("properties: deterministic\n--BODY--\n");
            for q in 0..a.state_count() {
                let marker = match a.acceptance() {
                    Acceptance::Buchi(f) | Acceptance::CoBuchi(f) => {
                        if f[q] {
                            " {0}".to_string()
                        } else {
                            String::new()
                        }
                    }
                    Acceptance::Parity(pr) => format!(" {{{}}}", pr[q]),
                };
                out.push_str(&format!("State: {q} {}{marker}\n", quote(a.state_name(q))));
                for (sym, target) in a.transitions(q).iter().enumerate() {
                    if let Some(t) = target {
                        out.push_str(&format!(
                            "{} {t}\n",
                            one_hot_label(sym, alphabet.len())
                        ));
                    }
                }
            }
        }
        HoaAutomaton::Nondet(a) => {
            out.push_str(&format!("States: {}\n", a.state_count()));
            for &s in a.initials() {
                out.push_str(&format!("Start: {s}\n"));
            }
            out.push_str(&format!("AP: {}", alphabet.len()));
            for sym in alphabet.syms() {
                out.push(' ');
                out.push_str(&quote(&ap_string(sym)));
            }
            out.push('\n');
            match a.kind() {
                MarkKind::Buchi => acceptance_header(&mut out, "Buchi", 1, "Inf(0)"),
                MarkKind::CoBuchi => acceptance_header(&mut out, "co-Buchi", 1, "Fin(0)"),
                MarkKind::Parity => {
                    let k = (0..a.state_count())
                        .flat_map(|q| a.transitions(q).iter())
                        .filter_map(|t| t.mark)
                        .max()
                        .unwrap_or(0)
                        + 1;
                    acceptance_header(
                        &mut out,
                        &format!("parity min even {k}"),
                        k,
                        &parity_formula(k),
                    );
                }
            }
            out.push_str("--BODY--\n");
            for q in 0..a.state_count() {
                out.push_str(&format!("State: {q} {}\n", quote(a.state_name(q))));
                for t in a.transitions(q) {
                    let marker = match t.mark {
                        Some(m) => format!(" {{{m}}}"),
                        None => String::new(),
                    };
                    out.push_str(&format!(
                        "{} {}{marker}\n",
                        one_hot_label(t.symbol, alphabet.len()),
                        t.target
                    ));
                }
            }
        }
    }
    out.push_str("--END--\n");
    out
}
