//! Timed automata, timed words and their concrete run semantics.
//!
//! Automata are read from a JSON document (`AutomatonSpec`) that may contain
//! constructs the tester does not support, such as diagonal constraints. The
//! validator reports every problem; [`TimedAutomaton::from_spec`] only
//! succeeds on a clean report.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::TimeValue;

pub const FORMAT_TAG: &str = "timed-tester/1";

/// Default cap on the number of concrete run states kept per word position.
pub const DEFAULT_STATE_CAP: usize = 100_000;

pub type ClockId = usize;
pub type LocationId = usize;
pub type SymbolId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "lt")]
    Lt,
    #[serde(rename = "le")]
    Le,
    #[serde(rename = "ge")]
    Ge,
    #[serde(rename = "gt")]
    Gt,
}

impl CmpOp {
    pub fn holds(self, value: &TimeValue, bound: &TimeValue) -> bool {
        match self {
            CmpOp::Lt => value < bound,
            CmpOp::Le => value <= bound,
            CmpOp::Ge => value >= bound,
            CmpOp::Gt => value > bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Atomic diagonal-free constraint `clock op bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClockConstraint {
    pub clock: ClockId,
    pub op: CmpOp,
    pub bound: u32,
}

impl ClockConstraint {
    pub fn holds(&self, valuation: &ClockValuation) -> bool {
        self.op.holds(&valuation.values[self.clock], &TimeValue::from_integer(self.bound as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: LocationId,
    pub guard: Vec<ClockConstraint>,
    pub symbol: SymbolId,
    pub resets: Vec<ClockId>,
    pub target: LocationId,
}

impl Transition {
    pub fn guard_holds(&self, valuation: &ClockValuation) -> bool {
        self.guard.iter().all(|g| g.holds(valuation))
    }

    pub fn resets_clock(&self, clock: ClockId) -> bool {
        self.resets.contains(&clock)
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardAtomSpec {
    pub clock: String,
    /// Present only for diagonal constraints `clock - minus op bound`, which are rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<String>,
    pub op: CmpOp,
    pub bound: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub source: String,
    pub symbol: String,
    #[serde(default)]
    pub guard: Vec<GuardAtomSpec>,
    #[serde(default)]
    pub resets: Vec<String>,
    pub target: String,
}

/// The on-disk automaton document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonSpec {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alphabet: Vec<String>,
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub initial: Vec<String>,
    #[serde(rename = "final")]
    pub final_locations: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    /// Optional declared maximum constant; must match the guards when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_constant: Option<u32>,
}

impl AutomatonSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AutomatonSpec = serde_json::from_str(text)?;
        if spec.format != FORMAT_TAG {
            return Err(Error::Format(spec.format));
        }
        Ok(spec)
    }
}

/// One problem found by [`validate_automaton`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateName { what: String, name: String },
    UndeclaredClock { transition: usize, clock: String },
    UndeclaredLocation { context: String, location: String },
    UndeclaredSymbol { transition: usize, symbol: String },
    DiagonalConstraint { transition: usize, clock: String, minus: String },
    EmptyInitial,
    MaxConstantMismatch { declared: u32, computed: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName { what, name } => write!(f, "duplicate {} {:?}", what, name),
            Violation::UndeclaredClock { transition, clock } => {
                write!(f, "transition {} uses undeclared clock {:?}", transition, clock)
            }
            Violation::UndeclaredLocation { context, location } => {
                write!(f, "{} refers to undeclared location {:?}", context, location)
            }
            Violation::UndeclaredSymbol { transition, symbol } => {
                write!(f, "transition {} uses symbol {:?} outside the alphabet", transition, symbol)
            }
            Violation::DiagonalConstraint { transition, clock, minus } => write!(
                f,
                "transition {} has diagonal constraint on {} - {}",
                transition, clock, minus
            ),
            Violation::EmptyInitial => write!(f, "no initial location"),
            Violation::MaxConstantMismatch { declared, computed } => write!(
                f,
                "declared max constant {} but guards use {}",
                declared, computed
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn max_guard_constant(spec: &AutomatonSpec) -> u32 {
    spec.transitions
        .iter()
        .flat_map(|t| t.guard.iter().map(|g| g.bound))
        .max()
        .unwrap_or(0)
}

/// Lists every well-formedness problem of an automaton description.
pub fn validate_automaton(spec: &AutomatonSpec) -> ValidationReport {
    let mut violations = Vec::new();
    for (what, names) in [
        ("symbol", &spec.alphabet),
        ("clock", &spec.clocks),
        ("location", &spec.locations),
    ] {
        let mut seen = HashSet::new();
        for n in names {
            if !seen.insert(n) {
                violations.push(Violation::DuplicateName { what: what.into(), name: n.clone() });
            }
        }
    }
    let locs: HashSet<&String> = spec.locations.iter().collect();
    let clocks: HashSet<&String> = spec.clocks.iter().collect();
    let symbols: HashSet<&String> = spec.alphabet.iter().collect();
    if spec.initial.is_empty() {
        violations.push(Violation::EmptyInitial);
    }
    for (ctx, list) in [("initial", &spec.initial), ("final", &spec.final_locations)] {
        for l in list {
            if !locs.contains(l) {
                violations.push(Violation::UndeclaredLocation { context: ctx.into(), location: l.clone() });
            }
        }
    }
    for (i, t) in spec.transitions.iter().enumerate() {
        for l in [&t.source, &t.target] {
            if !locs.contains(l) {
                violations.push(Violation::UndeclaredLocation {
                    context: format!("transition {}", i),
                    location: l.clone(),
                });
            }
        }
        if !symbols.contains(&t.symbol) {
            violations.push(Violation::UndeclaredSymbol { transition: i, symbol: t.symbol.clone() });
        }
        for g in &t.guard {
            if !clocks.contains(&g.clock) {
                violations.push(Violation::UndeclaredClock { transition: i, clock: g.clock.clone() });
            }
            if let Some(m) = &g.minus {
                violations.push(Violation::DiagonalConstraint {
                    transition: i,
                    clock: g.clock.clone(),
                    minus: m.clone(),
                });
            }
        }
        for r in &t.resets {
            if !clocks.contains(r) {
                violations.push(Violation::UndeclaredClock { transition: i, clock: r.clone() });
            }
        }
    }
    if let Some(declared) = spec.max_constant {
        let computed = max_guard_constant(spec);
        if declared != computed {
            violations.push(Violation::MaxConstantMismatch { declared, computed });
        }
    }
    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// Indexed automaton

/// A validated, index-based timed automaton.
#[derive(Clone, Debug)]
pub struct TimedAutomaton {
    pub name: Option<String>,
    pub alphabet: Vec<String>,
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub transitions: Vec<Transition>,
    pub initial: Vec<LocationId>,
    pub is_final: Vec<bool>,
    /// Largest constant over all guards.
    pub max_constant: u32,
    /// Largest constant compared against each clock.
    pub clock_max: Vec<u32>,
    outgoing: Vec<Vec<usize>>,
    symbol_index: HashMap<String, SymbolId>,
}

impl TimedAutomaton {
    pub fn from_spec(spec: &AutomatonSpec) -> Result<Self> {
        let report = validate_automaton(spec);
        if !report.is_ok() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidAutomaton(msgs.join("; ")));
        }
        let index = |names: &[String]| -> HashMap<String, usize> {
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect()
        };
        let loc_ix = index(&spec.locations);
        let clock_ix = index(&spec.clocks);
        let symbol_index = index(&spec.alphabet);
        let mut clock_max = vec![0u32; spec.clocks.len()];
        let transitions: Vec<Transition> = spec
            .transitions
            .iter()
            .map(|t| {
                let guard = t
                    .guard
                    .iter()
                    .map(|g| {
                        let clock = clock_ix[&g.clock];
                        clock_max[clock] = clock_max[clock].max(g.bound);
                        ClockConstraint { clock, op: g.op, bound: g.bound }
                    })
                    .collect();
                let mut resets: Vec<ClockId> = t.resets.iter().map(|r| clock_ix[r]).collect();
                resets.sort_unstable();
                resets.dedup();
                Transition {
                    source: loc_ix[&t.source],
                    guard,
                    symbol: symbol_index[&t.symbol],
                    resets,
                    target: loc_ix[&t.target],
                }
            })
            .collect();
        let mut outgoing = vec![Vec::new(); spec.locations.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(i);
        }
        let mut is_final = vec![false; spec.locations.len()];
        for f in &spec.final_locations {
            is_final[loc_ix[f]] = true;
        }
        let mut initial: Vec<LocationId> = spec.initial.iter().map(|l| loc_ix[l]).collect();
        initial.sort_unstable();
        initial.dedup();
        Ok(TimedAutomaton {
            name: spec.name.clone(),
            alphabet: spec.alphabet.clone(),
            clocks: spec.clocks.clone(),
            locations: spec.locations.clone(),
            transitions,
            initial,
            is_final,
            max_constant: max_guard_constant(spec),
            clock_max,
            outgoing,
            symbol_index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(&AutomatonSpec::from_json(text)?)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_index.get(name).copied()
    }

    pub fn outgoing(&self, location: LocationId) -> impl Iterator<Item = (usize, &Transition)> {
        self.outgoing[location].iter().map(move |&i| (i, &self.transitions[i]))
    }

    pub fn accepts_empty_word(&self) -> bool {
        self.initial.iter().any(|&q| self.is_final[q])
    }

    /// Interns a timed word over symbol names; unknown symbols map to `None`.
    pub fn resolve(&self, word: &TimedWord) -> Vec<Option<SymbolId>> {
        word.letters.iter().map(|l| self.symbol_id(&l.symbol)).collect()
    }
}

// ---------------------------------------------------------------------------
// Timed words

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub symbol: String,
    pub delay: TimeValue,
}

impl Letter {
    pub fn new(symbol: impl Into<String>, delay: TimeValue) -> Self {
        Letter { symbol: symbol.into(), delay }
    }
}

/// A finite timed word in relative-delay form; the first delay is the first
/// absolute time. Zero delays are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TimedWord {
    letters: Vec<Letter>,
    /// `times[i]` is the absolute time of letter `i`.
    times: Vec<TimeValue>,
}

impl Serialize for TimedWord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.letters.serialize(serializer)
    }
}

impl TimedWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        let mut times = Vec::with_capacity(letters.len());
        let mut acc = TimeValue::zero();
        for l in &letters {
            acc += &l.delay;
            times.push(acc.clone());
        }
        TimedWord { letters, times }
    }

    pub fn empty() -> Self {
        TimedWord::default()
    }

    /// Builds a word from `(symbol, delay-text)` pairs; panics on malformed delays.
    pub fn parse_pairs(pairs: &[(&str, &str)]) -> Self {
        TimedWord::new(
            pairs
                .iter()
                .map(|(s, d)| Letter::new(*s, TimeValue::parse(d).expect("valid delay")))
                .collect(),
        )
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn absolute_times(&self) -> &[TimeValue] {
        &self.times
    }

    pub fn total_weight(&self) -> TimeValue {
        self.times.last().cloned().unwrap_or_else(TimeValue::zero)
    }

    /// Recomputes the weight from the delays; always equals [`Self::total_weight`].
    pub fn recomputed_weight(&self) -> TimeValue {
        self.letters.iter().map(|l| &l.delay).sum()
    }

    pub fn push(&mut self, letter: Letter) {
        let t = self.total_weight() + &letter.delay;
        self.letters.push(letter);
        self.times.push(t);
    }

    pub fn slice(&self, start: usize, end: usize) -> TimedWord {
        TimedWord::new(self.letters[start..end].to_vec())
    }

    pub fn concat(&self, other: &TimedWord) -> TimedWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        TimedWord::new(letters)
    }

    pub fn untime(&self) -> Vec<&str> {
        self.letters.iter().map(|l| l.symbol.as_str()).collect()
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    /// Reads the JSON-lines word format. A leading `{"format": ...}` record is optional.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if let Some(letter) = parse_word_record(line, lineno + 1)? {
                letters.push(letter);
            }
        }
        Ok(TimedWord::new(letters))
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        out.push_str(&serde_json::json!({ "format": FORMAT_TAG }).to_string());
        out.push('\n');
        for l in &self.letters {
            out.push_str(&serde_json::to_string(l).expect("letter serializes"));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "({},{})", l.symbol, l.delay)?;
        }
        Ok(())
    }
}

/// Parses one line of the word format; blank lines and the header yield `None`.
pub fn parse_word_record(line: &str, lineno: usize) -> Result<Option<Letter>> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| Error::InvalidWord(format!("line {}: {}", lineno, e)))?;
    if let Some(tag) = value.get("format") {
        let tag = tag.as_str().unwrap_or_default();
        if tag != FORMAT_TAG {
            return Err(Error::Format(tag.to_string()));
        }
        return Ok(None);
    }
    let letter: Letter = serde_json::from_value(value)
        .map_err(|e| Error::InvalidWord(format!("line {}: {}", lineno, e)))?;
    Ok(Some(letter))
}

// ---------------------------------------------------------------------------
// Valuations and runs

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ClockValuation {
    pub values: Vec<TimeValue>,
}

impl ClockValuation {
    pub fn zero(clocks: usize) -> Self {
        ClockValuation { values: vec![TimeValue::zero(); clocks] }
    }

    pub fn from_values(values: Vec<TimeValue>) -> Self {
        ClockValuation { values }
    }

    pub fn delayed(&self, t: &TimeValue) -> Self {
        ClockValuation { values: self.values.iter().map(|v| v + t).collect() }
    }

    pub fn reset(&self, clocks: &[ClockId]) -> Self {
        let mut values = self.values.clone();
        for &c in clocks {
            values[c] = TimeValue::zero();
        }
        ClockValuation { values }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RunState {
    pub location: LocationId,
    pub valuation: ClockValuation,
}

impl RunState {
    pub fn new(location: LocationId, valuation: ClockValuation) -> Self {
        RunState { location, valuation }
    }

    pub fn initial(location: LocationId, clocks: usize) -> Self {
        RunState { location, valuation: ClockValuation::zero(clocks) }
    }
}

/// One step of a concrete run: the transition fired and the state reached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunStep {
    pub transition: usize,
    pub state: RunState,
}

/// A concrete run: a start state and one step per letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub start: RunState,
    pub steps: Vec<RunStep>,
}

impl Run {
    pub fn states(&self) -> impl Iterator<Item = &RunState> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.state))
    }

    pub fn last_state(&self) -> &RunState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.start)
    }
}

/// Successors of `state` after waiting `delay` and reading `symbol`, with the
/// transition used for each.
pub fn step_with_transitions(
    automaton: &TimedAutomaton,
    state: &RunState,
    delay: &TimeValue,
    symbol: &str,
) -> Vec<(usize, RunState)> {
    let Some(sym) = automaton.symbol_id(symbol) else {
        return Vec::new();
    };
    let delayed = state.valuation.delayed(delay);
    let mut out: Vec<(usize, RunState)> = Vec::new();
    for (idx, t) in automaton.outgoing(state.location) {
        if t.symbol == sym && t.guard_holds(&delayed) {
            let next = RunState::new(t.target, delayed.reset(&t.resets));
            if !out.iter().any(|(_, s)| *s == next) {
                out.push((idx, next));
            }
        }
    }
    out
}

/// Every successor of `state` after waiting `delay` and reading `symbol`.
pub fn step(automaton: &TimedAutomaton, state: &RunState, delay: &TimeValue, symbol: &str) -> Vec<RunState> {
    step_with_transitions(automaton, state, delay, symbol)
        .into_iter()
        .map(|(_, s)| s)
        .collect()
}

#[derive(Clone, Debug)]
struct Node {
    state: RunState,
    parent: usize,
    transition: usize,
}

/// Breadth search over concrete run states, returning one layer of nodes per position.
fn explore(
    automaton: &TimedAutomaton,
    starts: Vec<RunState>,
    word: &TimedWord,
    cap: usize,
) -> Result<Vec<Vec<Node>>> {
    let mut layers: Vec<Vec<Node>> = Vec::with_capacity(word.len() + 1);
    let mut first: Vec<Node> = Vec::new();
    let mut seen = HashSet::new();
    for s in starts {
        if seen.insert(s.clone()) {
            first.push(Node { state: s, parent: usize::MAX, transition: usize::MAX });
        }
    }
    layers.push(first);
    for letter in word.letters() {
        let prev = layers.last().expect("non-empty");
        let mut next: Vec<Node> = Vec::new();
        let mut index: BTreeMap<RunState, ()> = BTreeMap::new();
        for (pi, node) in prev.iter().enumerate() {
            for (t, succ) in step_with_transitions(automaton, &node.state, &letter.delay, &letter.symbol) {
                if index.insert(succ.clone(), ()).is_none() {
                    next.push(Node { state: succ, parent: pi, transition: t });
                    if next.len() > cap {
                        return Err(Error::ResourceLimit { what: "run states per position", cap });
                    }
                }
            }
        }
        let empty = next.is_empty();
        layers.push(next);
        if empty {
            break;
        }
    }
    Ok(layers)
}

fn rebuild_run(layers: &[Vec<Node>], mut index: usize) -> Run {
    let mut steps = Vec::with_capacity(layers.len() - 1);
    for layer in (1..layers.len()).rev() {
        let node = &layers[layer][index];
        steps.push(RunStep { transition: node.transition, state: node.state.clone() });
        index = node.parent;
    }
    steps.reverse();
    Run { start: layers[0][index].state.clone(), steps }
}

#[derive(Clone, Debug)]
pub struct Membership {
    pub accepted: bool,
    pub witness: Option<Run>,
}

/// Exact membership by breadth search over concrete run states.
pub fn membership_exact(automaton: &TimedAutomaton, word: &TimedWord) -> Result<Membership> {
    membership_exact_with_cap(automaton, word, DEFAULT_STATE_CAP)
}

pub fn membership_exact_with_cap(automaton: &TimedAutomaton, word: &TimedWord, cap: usize) -> Result<Membership> {
    let starts = automaton
        .initial
        .iter()
        .map(|&q| RunState::initial(q, automaton.num_clocks()))
        .collect();
    let layers = explore(automaton, starts, word, cap)?;
    if layers.len() != word.len() + 1 {
        return Ok(Membership { accepted: false, witness: None });
    }
    let last = layers.last().expect("non-empty");
    match last.iter().position(|n| automaton.is_final[n.state.location]) {
        Some(i) => Ok(Membership { accepted: true, witness: Some(rebuild_run(&layers, i)) }),
        None => Ok(Membership { accepted: false, witness: None }),
    }
}

#[derive(Clone, Debug)]
pub struct LocalRuns {
    pub exists: bool,
    pub end_states: Vec<RunState>,
}

/// Runs consuming `word` from an arbitrary start state.
pub fn local_run_exists(automaton: &TimedAutomaton, start: &RunState, word: &TimedWord) -> Result<LocalRuns> {
    let layers = explore(automaton, vec![start.clone()], word, DEFAULT_STATE_CAP)?;
    if layers.len() != word.len() + 1 {
        return Ok(LocalRuns { exists: false, end_states: Vec::new() });
    }
    let end_states: Vec<RunState> = layers.last().expect("non-empty").iter().map(|n| n.state.clone()).collect();
    Ok(LocalRuns { exists: !end_states.is_empty(), end_states })
}

/// Replays `run` over `word`, checking every step against the transition relation.
pub fn replay_run(automaton: &TimedAutomaton, word: &TimedWord, run: &Run) -> bool {
    if run.steps.len() != word.len() {
        return false;
    }
    let mut current = run.start.clone();
    for (letter, step) in word.letters().iter().zip(&run.steps) {
        let Some(t) = automaton.transitions.get(step.transition) else {
            return false;
        };
        if t.source != current.location || automaton.alphabet[t.symbol] != letter.symbol {
            return false;
        }
        let delayed = current.valuation.delayed(&letter.delay);
        if !t.guard_holds(&delayed) {
            return false;
        }
        let next = RunState::new(t.target, delayed.reset(&t.resets));
        if next != step.state {
            return false;
        }
        current = next;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::*;

    fn tv(s: &str) -> TimeValue {
        TimeValue::parse(s).unwrap()
    }

    #[test]
    fn validation_accepts_loop_automaton() {
        let spec = AutomatonSpec::from_json(LOOP_JSON).unwrap();
        assert!(validate_automaton(&spec).is_ok());
    }

    #[test]
    fn validation_reports_diagonal_constraint() {
        let mut spec = AutomatonSpec::from_json(LOOP_JSON).unwrap();
        spec.clocks.push("y".into());
        spec.transitions[0].guard.push(GuardAtomSpec {
            clock: "x".into(),
            minus: Some("y".into()),
            op: CmpOp::Lt,
            bound: 1,
        });
        let report = validate_automaton(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DiagonalConstraint { .. })));
        assert!(TimedAutomaton::from_spec(&spec).is_err());
    }

    #[test]
    fn validation_reports_max_constant_mismatch() {
        let mut spec = AutomatonSpec::from_json(LOOP_JSON).unwrap();
        spec.transitions[0].guard[0].bound = 3;
        spec.max_constant = Some(5);
        let report = validate_automaton(&spec);
        assert_eq!(
            report.violations,
            vec![Violation::MaxConstantMismatch { declared: 5, computed: 3 }]
        );
    }

    #[test]
    fn validation_reports_undeclared_names_and_empty_initial() {
        let mut spec = AutomatonSpec::from_json(LOOP_JSON).unwrap();
        spec.initial.clear();
        spec.transitions[0].resets.push("z".into());
        spec.transitions[0].target = "nowhere".into();
        let report = validate_automaton(&spec);
        assert!(report.violations.contains(&Violation::EmptyInitial));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UndeclaredClock { .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UndeclaredLocation { .. })));
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let text = LOOP_JSON.replace("timed-tester/1", "timed-tester/0");
        assert!(matches!(AutomatonSpec::from_json(&text), Err(Error::Format(_))));
    }

    #[test]
    fn step_applies_guard_and_reset() {
        let a = loop_automaton();
        let s0 = RunState::initial(0, 1);
        assert_eq!(step(&a, &s0, &tv("1/2"), "a"), vec![s0.clone()]);
        assert!(step(&a, &s0, &tv("3/2"), "a").is_empty());
        assert!(step(&a, &s0, &tv("1/2"), "zzz").is_empty());
    }

    #[test]
    fn step_without_reset_keeps_valuation_on_zero_delay() {
        let a = TimedAutomaton::from_json(NEVER_RESET_JSON).unwrap();
        let s = RunState::new(0, ClockValuation::from_values(vec![tv("3/4")]));
        assert_eq!(step(&a, &s, &TimeValue::zero(), "a"), vec![s]);
    }

    #[test]
    fn membership_examples() {
        let a = loop_automaton();
        let w = TimedWord::parse_pairs(&[("a", "1/2"), ("a", "9/10")]);
        let m = membership_exact(&a, &w).unwrap();
        assert!(m.accepted);
        let run = m.witness.unwrap();
        assert!(replay_run(&a, &w, &run));
        assert!(!membership_exact(&a, &TimedWord::parse_pairs(&[("a", "3/2")])).unwrap().accepted);
        assert!(membership_exact(&a, &TimedWord::empty()).unwrap().accepted);
    }

    #[test]
    fn local_run_examples() {
        let a = loop_automaton();
        let start = RunState::new(0, ClockValuation::from_values(vec![tv("1/2")]));
        let r = local_run_exists(&a, &start, &TimedWord::empty()).unwrap();
        assert!(r.exists);
        assert_eq!(r.end_states, vec![start.clone()]);
        let r = local_run_exists(&a, &start, &TimedWord::parse_pairs(&[("a", "1/4")])).unwrap();
        assert_eq!(r.end_states, vec![RunState::initial(0, 1)]);
        let at_one = RunState::new(0, ClockValuation::from_values(vec![tv("1")]));
        assert!(!local_run_exists(&a, &at_one, &TimedWord::parse_pairs(&[("a", "0")])).unwrap().exists);
    }

    #[test]
    fn state_cap_aborts() {
        let a = TimedAutomaton::from_json(BRANCHING_JSON).unwrap();
        let w = TimedWord::parse_pairs(&[("a", "1/2"), ("a", "1/3")]);
        assert!(matches!(
            membership_exact_with_cap(&a, &w, 1),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn word_jsonl_round_trip() {
        let w = TimedWord::parse_pairs(&[("a", "1/3"), ("b", "0.25")]);
        let text = w.to_jsonl();
        assert_eq!(TimedWord::from_jsonl(&text).unwrap(), w);
        let bare = "{\"symbol\":\"a\",\"delay\":0.5}\n{\"symbol\":\"b\",\"delay\":\"2/3\"}\n";
        let w2 = TimedWord::from_jsonl(bare).unwrap();
        assert_eq!(w2.total_weight(), tv("7/6"));
        assert!(TimedWord::from_jsonl("{\"format\":\"other\"}").is_err());
    }

    #[test]
    fn appending_keeps_prefix_times() {
        let mut w = TimedWord::parse_pairs(&[("a", "1/2"), ("a", "3")]);
        let before = w.absolute_times().to_vec();
        w.push(Letter::new("a", tv("7/5")));
        assert_eq!(&w.absolute_times()[..2], &before[..]);
        assert_eq!(w.total_weight(), w.recomputed_weight());
    }
}
