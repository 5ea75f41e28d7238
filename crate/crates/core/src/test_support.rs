//! Fixtures shared by unit tests.

use crate::model::TimedAutomaton;

pub const LOOP_JSON: &str = include_str!("../corpus/thick_loop.json");
pub const NEVER_RESET_JSON: &str = include_str!("../tests/fixtures/never_reset.json");
pub const ALTERNATING_JSON: &str = include_str!("../tests/fixtures/alternating.json");
pub const BRANCHING_JSON: &str = include_str!("../tests/fixtures/branching.json");
pub const LINEAR_JSON: &str = include_str!("../tests/fixtures/linear.json");
pub const DIAMOND_JSON: &str = include_str!("../tests/fixtures/diamond.json");
pub const TWO_CLOCK_JSON: &str = include_str!("../tests/fixtures/two_clock.json");
pub const EMPTY_LANGUAGE_JSON: &str = include_str!("../tests/fixtures/empty_language.json");

pub fn loop_automaton() -> TimedAutomaton {
    TimedAutomaton::from_json(LOOP_JSON).unwrap()
}

pub fn load(json: &str) -> TimedAutomaton {
    TimedAutomaton::from_json(json).unwrap()
}
