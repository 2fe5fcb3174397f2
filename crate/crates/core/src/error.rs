use thiserror::Error;

/// Errors raised while building, validating or evolving weighted graphs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("loop at vertex `{0}`")]
    Loop(String),

    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),

    #[error("rate p({from},{to}) = {value} is negative")]
    NegativeRate { from: String, to: String, value: f64 },

    #[error("rate p({from},{to}) = {value} is not finite")]
    NonFiniteRate { from: String, to: String, value: f64 },

    #[error("rate p({from},{to}) = {value} is positive but there is no edge from `{from}` to `{to}`")]
    RateOnNonEdge { from: String, to: String, value: f64 },

    #[error("duplicate rate entry for ({0},{1})")]
    DuplicateRate(String, String),

    #[error("row `{vertex}` sums to {sum}, not 1")]
    NonStochasticRow { vertex: String, sum: f64 },

    #[error("rate matrix has shape {rows}x{cols}, expected {n}x{n}")]
    Shape { rows: usize, cols: usize, n: usize },

    #[error("vertex `{0}` has no outgoing edge")]
    Sink(String),

    #[error("vertex `{0}` is isolated (D_x = 0)")]
    IsolatedVertex(String),

    #[error("test function is not admissible: Gamma(f)(x) = 0")]
    DegenerateTestFunction,

    #[error("missing value for vertex `{0}` in the prescribed function")]
    MissingValue(String),

    #[error("dimension {0} is not supported here")]
    UnsupportedDimension(f64),

    #[error("invalid dimension `{0}`")]
    InvalidDimension(String),

    #[error("vertices `{0}` and `{1}` of the clique are not adjacent")]
    NotAClique(String, String),

    #[error("clique must contain at least two vertices")]
    CliqueTooSmall,

    #[error("graph is not connected")]
    Disconnected,

    #[error("graph has one-sided edges; an unmixed graph is required")]
    Mixed,

    #[error("graph contains a triangle through `{0}`, `{1}`, `{2}`")]
    Triangle(String, String, String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no solution with all entries in (0,1]: {0}")]
    Infeasible(String),

    #[error("flow blew up at t = {t}: p({from},{to}) = {value}")]
    FlowBlowUp { t: f64, from: String, to: String, value: f64 },

    #[error("trajectory has not converged")]
    NotConverged,

    #[error("invalid grid `{0}`")]
    InvalidGrid(String),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
