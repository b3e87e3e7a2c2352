use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point} outside profile domain [0, {limit}]")]
    OutOfDomain { point: f64, limit: f64 },
    #[error("derivative of order {0} not available")]
    DerivUnavailable(usize),
    #[error("exponent {0:e} exceeds the representable range")]
    RangeError(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("step control failed at k = {k}: {detail}")]
    ToleranceNotMet { k: String, detail: String },
    #[error("k = {0} is outside the closed lower half-plane")]
    WrongHalfPlane(String),
    #[error("k = {0} is outside the admissible region")]
    WrongRegion(String),
    #[error("zero denominator in {what} at k = {k}")]
    ZeroDenominator { what: String, k: String },
    #[error("series and fitted coefficients disagree: {0}")]
    FitDisagreement(String),
    #[error("rational regularizer constraint system is singular")]
    SingularConstraintSystem,
    #[error("evaluation point {0} too close to the contour")]
    TooCloseToContour(String),
    #[error("operator I - C_w ill conditioned (estimate {0:e})")]
    IllConditioned(f64),
    #[error("moment integrals do not converge: {0}")]
    MomentDivergence(String),
    #[error("gate failed: {0}")]
    GateFailed(String),
    #[error("preset unavailable: {0}")]
    PresetUnavailable(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn kstr(k: num_complex::Complex64) -> String {
    format!("{:.6}{:+.6}i", k.re, k.im)
}
