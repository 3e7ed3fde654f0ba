use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid demand: {0}")]
    Demand(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("node {node} cannot reach the source of object {object}")]
    Unreachable { node: u32, object: u32 },

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("cannot evict from an empty cache at node {0}")]
    EmptyCache(u32),

    #[error("region check needs {count} variables, limit is {limit}; shrink the catalog or the caches")]
    TooManyVariables { count: usize, limit: usize },

    #[error("slack must be strictly positive (got {0})")]
    NonPositiveSlack(f64),

    #[error("horizon of {slots} slots is too short for a bound check (need at least {min})")]
    HorizonTooShort { slots: usize, min: usize },

    #[error("watchdog: {events} events processed without reaching quiescence")]
    Watchdog { events: u64 },

    #[error("simulation stalled with {pending} pending interest entries")]
    Stalled { pending: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
