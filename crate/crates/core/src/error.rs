use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("asymptotic series too inaccurate at rho = {rho}: smallest term {term:e} exceeds {tol:e}")]
    Precision { rho: f64, term: f64, tol: f64 },

    #[error("log-gamma pole at z = {0}")]
    Pole(f64),

    #[error("step size underflow at r* = {at}: h = {step:e}")]
    StepUnderflow { at: f64, step: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("non-finite value encountered {0}")]
    NonFinite(String),

    #[error("unitarity violated for l = {l}, omega = {omega}: defect {defect:e}")]
    Unitarity { l: u32, omega: f64, defect: f64 },

    #[error("frequency {omega} outside table range [{min}, {max}]")]
    TableRange { omega: f64, min: f64, max: f64 },

    #[error("angular momentum {l} exceeds table l_max = {l_max}")]
    TableL { l: u32, l_max: u32 },

    #[error("table build failed: {failed} of {total} entries failed (first: {first})")]
    TableBuild {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("cache file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("cache file {path}: content hash mismatch")]
    HashMismatch { path: PathBuf },

    #[error("cache file {path}: built for {found}, requested {expected}")]
    ParameterMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("quadrature tolerance not met: estimated error {error:e} on value {value:e}")]
    Tolerance { value: f64, error: f64 },

    #[error("oscillation budget exceeded: tau0 = {tau0}, limit {limit}")]
    OscillationBudget { tau0: f64, limit: f64 },

    #[error("principal-value window [{lo}, {hi}] leaves the integration range [{min}, {max}]")]
    WindowOverlap { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("principal-value subtraction residual {residual:e} exceeds {tol:e}")]
    PvConvergence { residual: f64, tol: f64 },

    #[error("vacuum {0} is not supported by this evaluation")]
    Vacuum(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that mean a cache file cannot be trusted.
    pub fn is_cache_defect(&self) -> bool {
        matches!(self, Error::Corrupt { .. } | Error::HashMismatch { .. } | Error::ParameterMismatch { .. })
    }
}
