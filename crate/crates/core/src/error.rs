use thiserror::Error;

/// Errors surfaced by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("polynomial has a repeated real root near {0}")]
    NonSquarefree(f64),
    #[error("duplicate interpolation node at x = {0}")]
    DuplicateNode(f64),
    #[error("quadrature failed to converge (last delta {last_delta:e} with {nodes} nodes)")]
    NoConvergence { last_delta: f64, nodes: usize },
    #[error("linear system is singular or badly scaled: {0}")]
    SingularSystem(&'static str),
    #[error("pole {0} lies on the support")]
    AlphaOnSupport(f64),
    #[error("polynomial root {0} lies on the support")]
    RootOnSupport(f64),
    #[error("{0}")]
    GapRootMismatch(String),
    #[error("combined density negative at x = {x} (value {value:e})")]
    NegativeDensity { x: f64, value: f64 },
    #[error("formula requires a > 0 unless the reciprocal component vanishes")]
    DegenerateLeftEndpoint,
    #[error("no root bracketed for the transcendental system")]
    NoRoot,
    #[error("descent stalled at objective {0:e}")]
    Stalled(f64),
    #[error("root {0} outside the admissible domain [0, 18]")]
    RootOutOfRange(f64),
    #[error("gap ({lo}, {hi}) contains {count} active roots, expected one")]
    MultipleRootsInGap { lo: f64, hi: f64, count: usize },
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
