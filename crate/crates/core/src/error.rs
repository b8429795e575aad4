use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid bounds: {0}")]
    BoundOrder(String),

    #[error("degenerate box: every axis must have positive width")]
    DegenerateBox,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not Lipschitz backward distinguishable at these orders (min ratio {0:e})")]
    NotDistinguishable(f64),

    #[error("injectivity not guaranteed: gamma {gamma} >= gamma* {gamma_star}")]
    InjectivityNotGuaranteed { gamma: f64, gamma_star: f64 },

    #[error("series need not converge: gamma*||A~|| = {0} >= 1")]
    SeriesDivergent(f64),

    #[error("matrix is not Schur: spectral radius {0} >= 1")]
    NotSchur(f64),

    #[error("pair (A~, B~) is not controllable")]
    NotControllable,

    #[error("monomial basis is not closed under composition with f: {0}")]
    BasisNotClosed(String),

    #[error("coefficient system is singular (resonant eigenvalue)")]
    Resonant,

    #[error("plant has no polynomial structure")]
    NotPolynomial,

    #[error("decomposition function disagrees with T* at a spot check (gap {0:e})")]
    BadDecomposition(f64),

    #[error("enclosure violated at step {step}")]
    EnclosureViolation { step: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
