use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("determinant drifted to {det:e}; basis update is numerically unsound")]
    DeterminantDrift { det: f64 },

    #[error("enumeration cap exceeded: expected about {expected:.0} points, cap is {cap}")]
    EnumerationCap { expected: f64, cap: usize },

    #[error("region circumradius {circumradius} exceeds enumeration radius {radius}")]
    RegionNotEnclosed { circumradius: f64, radius: f64 },

    #[error("family of {size} vectors exceeds the subset-enumeration cap of {cap}")]
    FamilyTooLarge { size: usize, cap: usize },

    #[error("base subset must be linearly independent")]
    DependentBase,

    #[error("test functional must be nonnegative and vanish on dependent subsets")]
    InvalidFunctional,

    #[error("intensity {lambda} exceeds the small-volume guard {limit} (n/200); set allow_large_lambda to override")]
    GuardViolation { lambda: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("suite has no experiments")]
    EmptySuite,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
