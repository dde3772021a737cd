use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("stencil of width {width} does not fit a grid axis of {points} points")]
    StencilTooWide { width: usize, points: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("coefficient derivative unavailable: {0}")]
    MissingDerivative(String),

    #[error("expression parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown variable `{0}` in expression")]
    UnknownVariable(String),

    #[error("spectral family rejected: {0}")]
    FamilyRejected(String),

    #[error("degenerate kernel matrix (condition {condition:.3e} exceeds cap {cap:.1e})")]
    DegenerateKernel { condition: f64, cap: f64 },

    #[error("kernel singular at {} grid point(s), first at index {}", points.len(), points.first().copied().unwrap_or(0))]
    SingularKernel { points: Vec<usize> },

    #[error("closedness violated: loop residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotClosed { residual: f64, tolerance: f64 },

    #[error("Wronskian changes sign or vanishes near index {0}")]
    WronskianZero(usize),

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("support touches the boundary band: {0}")]
    SupportTouchesBoundary(String),

    #[error("chain leaves the grid: {0}")]
    ChainOutsideGrid(String),

    #[error("unknown scenario `{name}`; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
