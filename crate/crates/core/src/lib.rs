//! Invariant-metric computations on model domains `Ω_P ⊂ ℂ²`.
//!
//! * [`polynomial`]: exact calculus for real polynomials in `z, z̄`.
//! * [`domain`]: model domains, the Catlin metric, D'Angelo type, dilations.
//! * [`geodesic`]: path lengths, distance brackets, vertical geodesic rays.
//! * [`gromov`]: Gromov products and four-point hyperbolicity estimates.
//! * [`scaling`]: the scaling construction and scaling at infinity.
//! * [`oracles`]: exact Kobayashi distance of the Siegel domain via the ball.

pub mod domain;
pub mod error;
pub mod geodesic;
pub mod gromov;
pub mod oracles;

pub use domain::{DangeloType, ModelDomain, Point, PointTangent, Tangent};
pub use error::{Error, Result};
pub use geodesic::{DistanceBracket, DistanceProvider, PiecewisePath, SolverOptions};
pub use polynomial::WirtingerPolynomial;

pub mod polynomial;
pub mod scaling;
