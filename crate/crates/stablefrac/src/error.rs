use thiserror::Error;

/// Every failure mode of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in the open interval (1, 2), got {0}")]
    BadAlpha(f64),
    #[error("unsupported dimension {0}")]
    BadDimension(usize),
    #[error("spectral measure is degenerate (non-degeneracy margin {0:e})")]
    DegenerateMeasure(f64),
    #[error("spectral measure is not symmetric (odd moment {0:e})")]
    AsymmetricMeasure(f64),
    #[error("spectral measure has non-positive or non-finite mass")]
    BadMass,
    #[error("Σ matrix is singular (smallest eigenvalue {0:e})")]
    SingularSigmaMatrix(f64),
    #[error("array size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("multiplier output is not real (imaginary residue {0:e} relative)")]
    NonHermitianOutput(f64),
    #[error("semigroup time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("bad exponent: {0}")]
    BadExponent(String),
    #[error("input mean {0:e} is not negligible; the operator annihilates the zero mode")]
    MeanNotZero(f64),
    #[error("operation needs a discrete spectral measure")]
    UnsupportedMeasure,
    #[error("bad norm specification: {0}")]
    BadSpec(String),
    #[error("dimension {0} is not supported by this evaluation path")]
    UnsupportedDim(usize),
    #[error("kernel evaluated at the origin")]
    OriginSingularity,
    #[error("model not supported: {0}")]
    UnsupportedModel(String),
    #[error("shape does not fit in the grid box with the required margin")]
    ShapeTooLarge,
    #[error("shape not supported: {0}")]
    UnsupportedShape(String),
    #[error("smallest time {t:e} under-resolves the kernel (t^(1/α)·ξ_max = {resolved:.3} < 4)")]
    ResolutionGuard { t: f64, resolved: f64 },
    #[error("bad time sequence: {0}")]
    BadTimeSequence(String),
    #[error("fit diverged: residual {residual:e} vs slope {slope:e}")]
    FitDiverged { residual: f64, slope: f64 },
    #[error("unknown check {0}")]
    UnknownCheck(String),
    #[error("check {check} does not apply: {reason}")]
    UnsupportedModelForCheck { check: String, reason: String },
    #[error("field is identically zero")]
    ZeroField,
    #[error("bad exponents: {0}")]
    BadExponents(String),
    #[error("descent stalled: no decreasing step down to the minimal step size")]
    Stalled,
    #[error("schema violation at {pointer}: {message}")]
    SchemaViolation { pointer: String, message: String },
    #[error("bad field file: {0}")]
    BadFieldFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
