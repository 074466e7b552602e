use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Bloch vector norm {norm} deviates from 1 beyond tolerance {tol}")]
    NotOnSphere { norm: f64, tol: f64 },

    #[error("time span has negative length: [{t0}, {t1}]")]
    NegativeTimeSpan { t0: f64, t1: f64 },

    #[error("uncertainty waveform exceeds its bound {bound} (|eps(t)| = {actual} at t = {t})")]
    BoundViolation { bound: f64, actual: f64, t: f64 },

    #[error(
        "p0 = {p0} exceeds eps^2/(1+eps^2) = {threshold}; the single-axis period \
         formula does not apply, use the general period instead"
    )]
    PeriodDomain { p0: f64, threshold: f64 },

    #[error("drive design did not reach the target domain within t = {max_time} (final failure probability {final_p})")]
    DesignFailure { max_time: f64, final_p: f64 },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("malformed control trace file: {0}")]
    TraceFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
