use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {what} needs {required} bytes, cap is {cap} bytes")]
    Capacity {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("non-finite value detected at step {step}")]
    NumericalAbort { step: usize },

    #[error("single-step Carleman state is exhausted; it cannot feed a second collision")]
    StateExhausted,

    #[error("cannot normalize a zero Carleman vector")]
    ZeroScale,

    #[error("LCU decomposition infeasible for eigenvalue {eigenvalue} with gamma = {gamma}")]
    Infeasible { eigenvalue: f64, gamma: f64 },

    #[error("ancilla post-selection has zero success probability")]
    ZeroSuccessProbability,

    #[error("relative error undefined: |a| <= {eps:e} at site {site}")]
    DivisionGuard { site: usize, eps: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}:{line}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed state dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
