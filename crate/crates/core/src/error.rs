use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time value {0:?}")]
    InvalidTime(String),
    #[error("time value {0:?} exceeds the denominator limit")]
    DenominatorTooLarge(String),
    #[error("malformed automaton: {0}")]
    InvalidAutomaton(String),
    #[error("malformed timed word: {0}")]
    InvalidWord(String),
    #[error("unsupported format tag {0:?}, expected \"timed-tester/1\"")]
    Format(String),
    #[error("resource limit exceeded: {what} (cap {cap})")]
    ResourceLimit { what: &'static str, cap: usize },
    #[error("edit script position {position} out of range for word of length {len}")]
    ScriptPosition { position: usize, len: usize },
    #[error("word has zero total weight")]
    ZeroWeight,
    #[error("component {0} is not known to be thick")]
    NotThick(usize),
    #[error("no link between the requested states: {0}")]
    NoLink(String),
    #[error("language of the automaton is empty")]
    EmptyLanguage,
    #[error("cannot build an epsilon-far word: {0}")]
    BudgetInfeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("input too long for exhaustive search ({len} > {cap})")]
    TooLong { len: usize, cap: usize },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
