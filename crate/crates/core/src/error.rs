use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("empty support")]
    EmptySupport,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("level unreachable: level {level} is not below the total norm {norm}")]
    LevelUnreachable { level: f64, norm: f64 },
    #[error("alpha = {0} is outside the convergence radius 4*pi/e of the series")]
    OutsideConvergenceRadius(f64),
    #[error("gradient vanishes; the Trudinger quotient is undefined")]
    ZeroGradient,
    #[error("the zero field has no Luxemburg quotient")]
    ZeroField,
    #[error("first-fit coloring needs more than {0} classes")]
    ColoringExceeded(usize),
    #[error("symmetric factorization broke down after {attempts} orderings: {detail}")]
    FactorizationBreakdown { attempts: usize, detail: String },
    #[error(
        "level {level} exceeds min(S2'/4, S2) = {max}; the covering argument needs every cube at or below that level"
    )]
    LevelTooLarge { level: f64, max: f64 },
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} = {x}")))
    }
}
