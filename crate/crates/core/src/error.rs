use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // geometry
    #[error("slit radius {0} outside (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("slit radii {0} and {1} closer than the separation threshold {2}")]
    RadiiTooClose(f64, f64, f64),
    #[error("slit arc length {0} outside (0, 2pi)")]
    BadArcLength(f64),
    #[error("mesh resolution too low: {0}")]
    ResolutionTooLow(String),
    #[error("moduli vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    // potential
    #[error("collocation system ill-conditioned (condition estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("boundary residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("pole {0} is closer than 1e-3 to the boundary")]
    PoleTooCloseToBoundary(String),
    #[error("driving point {0} is not a usable point of the unit circle")]
    GammaOnSlit(String),
    #[error("boundary data has {got} values, mesh has {expected} nodes")]
    DataMismatch { expected: usize, got: usize },
    #[error("boundary data is not finite")]
    NonFiniteData,

    // schiffer
    #[error("period matrix is singular")]
    SingularPeriodMatrix,
    #[error("tip velocity extrapolation diverged on slit {slit} (gap {gap:.3e})")]
    ExtrapolationDiverged { slit: usize, gap: f64 },

    // loewner
    #[error("adaptive step fell below 1e-12 at t = {0}")]
    StepUnderflow(f64),
    #[error("reverse flow left the domain at sample time {0}")]
    ReverseBlowup(f64),
    #[error("arc encoding failed at vertex {vertex}: {reason}")]
    NoConvergence { vertex: usize, reason: String },
    #[error("sample time {0} outside the driving path")]
    SampleOutOfRange(f64),

    // sde
    #[error("drift bracket has real part {0:.3e}")]
    DriftNotReal(f64),
    #[error("domain degenerated: {0}")]
    DegenerateDomain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // experiments
    #[error("finite-difference grid too coarse (h = {0})")]
    GridTooCoarse(f64),
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o: {0}")]
    Io(String),
    #[error("serialization: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
