use thiserror::Error;

/// Errors raised by the detector simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("phase-space dimension must be even and at least {min}, found {found}")]
    BadDimension { min: usize, found: usize },

    #[error("uncertainty relation violated: symplectic eigenvalue {nu} < 1")]
    UncertaintyViolation { nu: f64 },

    #[error("invalid mode label {label} for {bc} cavity")]
    InvalidMode { label: i64, bc: &'static str },

    #[error("momentum coupling requires a periodic cavity, got {bc}")]
    SchemeMismatch { bc: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("step size underflow at tau = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {max_steps} steps at tau = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("symplectic residual {residual:e} exceeds bound {bound:e}")]
    SymplecticDrift { residual: f64, bound: f64 },

    #[error("quadrature failed to converge: error estimate {estimate:e} above {target:e}")]
    QuadratureNonConvergence { estimate: f64, target: f64 },

    #[error("probability {0} outside (0, 1/2)")]
    ProbabilityOutOfRange(f64),

    #[error("least-squares fit needs at least 3 points with distinct abscissae")]
    DegenerateFit,

    #[error("acceleration grids differ between boundary conditions")]
    GridMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
