use num_complex::Complex64;
use thiserror::Error;

use crate::geodesic::DistanceBracket;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("polynomial is not Hermitian-symmetric at bidegree ({j}, {k})")]
    NonHermitian { j: u32, k: u32 },
    #[error("malformed polynomial: {0}")]
    MalformedPolynomial(String),
    #[error("model polynomial has a harmonic term at bidegree ({j}, {k})")]
    HarmonicTerm { j: u32, k: u32 },
    #[error("model polynomial has nonzero constant term {0}")]
    NonzeroConstant(f64),
    #[error("model polynomial is not subharmonic: Laplacian {laplacian} at z = {z}")]
    NotSubharmonic { z: Complex64, laplacian: f64 },
    #[error("point is not interior: defining value {r} >= -1e-14")]
    BoundaryPoint { r: f64 },
    #[error("point is not on the boundary: defining value {r}")]
    NotBoundary { r: f64 },
    #[error("polynomial is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: u32 },
    #[error("path leaves the domain on segment {segment} (defining value {r})")]
    PathExitsDomain { segment: usize, r: f64 },
    #[error("iteration budget exhausted; best bracket [{}, {}]", best.lower, best.upper)]
    BudgetExhausted { best: DistanceBracket },
    #[error("scaling step is degenerate: recentered polynomial vanishes")]
    DegenerateStep,
    #[error("rescaled defining function is not canonical: residual {residual}")]
    CanonicalFormViolation { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
