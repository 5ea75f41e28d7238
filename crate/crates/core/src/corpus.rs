//! Reference automata shipped with the crate.

use crate::model::TimedAutomaton;

/// One-location loop `a, x<1, {x}`: a single thick component.
pub const THICK_LOOP: &str = include_str!("../corpus/thick_loop.json");
/// Two thick loops joined by a bridge letter `b`.
pub const TWO_PHASE: &str = include_str!("../corpus/two_phase.json");
/// One-location loop with the punctual guard `x=1`: a thin component.
pub const THIN_PUNCTUAL: &str = include_str!("../corpus/thin_punctual.json");

pub fn thick_loop() -> TimedAutomaton {
    TimedAutomaton::from_json(THICK_LOOP).expect("corpus automaton is valid")
}

pub fn two_phase() -> TimedAutomaton {
    TimedAutomaton::from_json(TWO_PHASE).expect("corpus automaton is valid")
}

pub fn thin_punctual() -> TimedAutomaton {
    TimedAutomaton::from_json(THIN_PUNCTUAL).expect("corpus automaton is valid")
}

/// All corpus automata with their names.
pub fn all() -> Vec<(&'static str, TimedAutomaton)> {
    vec![
        ("thick_loop", thick_loop()),
        ("two_phase", two_phase()),
        ("thin_punctual", thin_punctual()),
    ]
}
