use thiserror::Error;

/// Errors raised while building networks, stepping machines or running experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero-length vector cannot be normalized")]
    ZeroVector,

    #[error("non-finite value in vector")]
    NonFinite,

    #[error("input {value} outside the admissible range {range}")]
    InputOutOfRange { value: f64, range: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input channel {0}")]
    InvalidChannel(usize),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("dangling edge: {0}")]
    DanglingEdge(String),

    #[error("unconnected output: node {node} port {port}")]
    UnconnectedOutput { node: usize, port: usize },

    #[error("cycle detected through node {0}")]
    Cycle(usize),

    #[error("undeclared source port {0}")]
    UnknownSource(usize),

    #[error("message propagation exceeded {0} hops")]
    PropagationLimit(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
