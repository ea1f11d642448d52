use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenvalue iteration did not converge (seed {seed})")]
    EigenNonConvergence { seed: u64 },
    #[error("degree {0} exceeds the supported maximum of 512")]
    DegreeTooLarge(usize),
    #[error("phase {phase} is within 1e-12 of the evaluation point")]
    Singular { phase: f64 },
    #[error("argument-principle count {count} (expected 1) at n={n}, theta={theta}")]
    UniquenessViolation {
        count: i64,
        n: usize,
        theta: f64,
        background: Vec<f64>,
    },
    #[error("contour phase step {step:.3} rad exceeds pi/2 after maximal refinement")]
    ContourResolution { step: f64 },
    #[error("{0} is outside the supported range")]
    OutOfRange(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("incomplete scan in box t=[{t_lo}, {t_hi}]: count {expected}, isolated {found}")]
    IncompleteScan {
        t_lo: f64,
        t_hi: f64,
        expected: i64,
        found: usize,
    },
    #[error("too few samples: need {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("histograms have different bin edges")]
    EdgeMismatch,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
