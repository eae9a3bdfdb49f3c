use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("angle {0} outside the admissible interval")]
    AngleOutOfRange(f64),
    #[error("point {0} lies too close to the positive real axis (distance {1:.3e})")]
    TooCloseToAxis(String, f64),
    #[error("point {0} lies too close to a pole (distance {1:.3e})")]
    PoleProximity(String, f64),
    #[error("point {0} is outside the domain")]
    OutsideDomain(String),
    #[error("no admissible integration ray: {0}")]
    NoAdmissibleRay(String),
    #[error("ray does not decay (rate {0})")]
    NonDecayingRay(f64),
    #[error("tolerance not met: estimate {estimate}, error {error:.3e}, requested {requested:.3e}")]
    ToleranceNotMet {
        estimate: String,
        error: f64,
        requested: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("sup norm unavailable: {0}")]
    UnboundedGerm(String),
}

pub(crate) fn fmt_c(z: num_complex::Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}
