//! Timed automata, timed edit distance and a sampling-based membership tester.

pub mod corpus;
pub mod distance;
pub mod harness;
pub mod lp;
pub mod error;
pub mod model;
pub mod region;
pub mod sampling;
pub mod structure;
pub mod tester;
pub mod time;
pub mod zone;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use model::{Letter, TimedAutomaton, TimedWord};
pub use time::TimeValue;
