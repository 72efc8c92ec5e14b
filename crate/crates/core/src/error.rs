use num_complex::Complex64;
use thiserror::Error;

/// Errors produced anywhere in the derivation / numeric pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),
    #[error("matrix is singular over Q(t)")]
    SingularOverQt,
    #[error("degenerate family: {0}")]
    DegenerateFamily(String),
    #[error("reduction did not lower the u-degree of the form ({0})")]
    ReductionDiverges(String),
    #[error("root isolation failed after {iterations} refinement rounds")]
    PrecisionExhausted { iterations: usize },
    #[error("rational function has a pole at t = {0}")]
    PoleAt(Complex64),
    #[error("parameter t = {0} is singular (leading coefficient vanishes)")]
    AtSingularT(Complex64),
    #[error("fiber cohomology has rank zero; no cycles to construct")]
    RankZero,
    #[error("valley centers moved too far in one tracking step near t = {0}")]
    StepCollision(Complex64),
    #[error("path passes within {radius:e} of singular value {center}")]
    SingularProximity { center: Complex64, radius: f64 },
    #[error("quadrature tolerance not met: error {achieved:e} > target {target:e}")]
    ToleranceNotMet { achieved: f64, target: f64 },
    #[error("integrand does not decay on a valley tail (Re g = {re_g})")]
    NonDecayingTail { re_g: f64 },
    #[error("monodromy loop around {0} meets another singular value")]
    LoopHitsSingularity(Complex64),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
