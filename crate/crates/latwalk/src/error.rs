use thiserror::Error;

/// Errors raised by the simulator, the oracles and the scenario layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("boson table overflow: {size} bosons requested at a cell, cap is {cap}")]
    BosonTableOverflow { size: usize, cap: usize },

    #[error("lattice store overflow: {cells} cells exceed the cap of {cap}")]
    LatticeOverflow { cells: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("singular time t = {t}: B(t) vanishes")]
    Singular { t: f64 },

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("invalid config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
