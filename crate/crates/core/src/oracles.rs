//! Exact Kobayashi distance of the Siegel domain `{Re w + |z|² < 0}`.
//!
//! The Cayley-type map
//!
//! ```text
//! ζ₁ = 2z / (1 - w),   ζ₂ = (w + 1) / (w - 1)
//! ```
//!
//! is a biholomorphism onto the unit ball of `ℂ²` sending `(0, -1)` to the
//! origin, with inverse `z = ζ₁ / (1 - ζ₂)`, `w = -(1 + ζ₂) / (1 - ζ₂)`.
//! It satisfies `1 - |ζ|² = 4 |r| / |1 - w|²`, which is used to keep
//! distances accurate near the boundary.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ModelDomain, Point};
use crate::error::{Error, Result};
use crate::geodesic::{DistanceBracket, DistanceProvider};
use crate::gromov::BandSampler;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl BallPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    /// `⟨self, other⟩ = Σ a_i conj(b_i)`.
    pub fn inner(&self, other: &BallPoint) -> Complex64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj()
    }

    pub fn is_inside(&self) -> bool {
        self.norm_sqr() < 1.0
    }
}

fn siegel() -> ModelDomain {
    ModelDomain::thullen(1)
}

pub fn siegel_to_ball(p: &Point) -> Result<BallPoint> {
    siegel().depth(p)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(BallPoint::new(2.0 * p.z / (one - p.w), (p.w + one) / (p.w - one)))
}

pub fn ball_to_siegel(b: &BallPoint) -> Result<Point> {
    if !b.is_inside() {
        return Err(Error::InvalidParameter(format!(
            "point is not in the open ball: |ζ|² = {}",
            b.norm_sqr()
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(Point::new(b.z1 / (one - b.z2), -(one + b.z2) / (one - b.z2)))
}

/// `arctanh s` from `s` and `1 - s²`, avoiding cancellation as `s → 1`.
fn arctanh_split(s: f64, one_minus_s2: f64) -> f64 {
    (1.0 + s).ln() - 0.5 * one_minus_s2.ln()
}

/// Distance given the two points and their precomputed `1 - |·|²`.
fn ball_distance_with(a: &BallPoint, b: &BallPoint, da: f64, db: f64) -> f64 {
    let denom = (Complex64::new(1.0, 0.0) - a.inner(b)).norm_sqr();
    // |1 - ⟨a,b⟩|² - (1 - |a|²)(1 - |b|²) = |a - b|² - |a₁b₂ - a₂b₁|²
    let diff = (a.z1 - b.z1).norm_sqr() + (a.z2 - b.z2).norm_sqr();
    let wedge = (a.z1 * b.z2 - a.z2 * b.z1).norm_sqr();
    let s2 = ((diff - wedge) / denom).max(0.0);
    if s2 == 0.0 {
        return 0.0;
    }
    arctanh_split(s2.sqrt(), da * db / denom)
}

/// Kobayashi distance of the unit ball: `arctanh |φ_a(b)|`.
pub fn ball_distance(a: &BallPoint, b: &BallPoint) -> f64 {
    ball_distance_with(a, b, 1.0 - a.norm_sqr(), 1.0 - b.norm_sqr())
}

/// Exact Kobayashi distance between two points of the Siegel domain.
pub fn kobayashi_distance_siegel(p: &Point, q: &Point) -> Result<f64> {
    let d = siegel();
    let (rp, rq) = (d.depth(p)?, d.depth(q)?);
    let (a, b) = (siegel_to_ball(p)?, siegel_to_ball(q)?);
    let one = Complex64::new(1.0, 0.0);
    let da = 4.0 * rp / (one - p.w).norm_sqr();
    let db = 4.0 * rq / (one - q.w).norm_sqr();
    Ok(ball_distance_with(&a, &b, da, db))
}

/// Ball automorphism `U ∘ φ_a`, where `φ_a` is the involution exchanging `a` and 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    a: BallPoint,
    u: [[Complex64; 2]; 2],
}

impl BallAutomorphism {
    /// `u` must be unitary to within `1e-12`.
    pub fn new(a: BallPoint, u: [[Complex64; 2]; 2]) -> Result<Self> {
        if !a.is_inside() {
            return Err(Error::InvalidParameter("automorphism centre must lie in the ball".into()));
        }
        let col = |j: usize| BallPoint::new(u[0][j], u[1][j]);
        let (c0, c1) = (col(0), col(1));
        let err = (c0.norm_sqr() - 1.0).abs() + (c1.norm_sqr() - 1.0).abs() + c0.inner(&c1).norm();
        if !(err < 1e-12) {
            return Err(Error::InvalidParameter("matrix is not unitary".into()));
        }
        Ok(Self { a, u })
    }

    /// Unitary `[[e^{iα} cos θ, -e^{-iβ} sin θ], [e^{iβ} sin θ, e^{-iα} cos θ]]`.
    pub fn from_angles(a: BallPoint, theta: f64, alpha: f64, beta: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let ea = Complex64::from_polar(1.0, alpha);
        let eb = Complex64::from_polar(1.0, beta);
        Self::new(a, [[ea * c, -eb.conj() * s], [eb * s, ea.conj() * c]])
    }

    pub fn apply(&self, x: &BallPoint) -> BallPoint {
        let a = &self.a;
        let aa = a.norm_sqr();
        let xa = x.inner(a);
        let denom = Complex64::new(1.0, 0.0) - xa;
        let phi = if aa == 0.0 {
            BallPoint::new(-x.z1, -x.z2)
        } else {
            let sa = (1.0 - aa).sqrt();
            // P_a x = (⟨x,a⟩/|a|²) a,  Q_a x = x - P_a x
            let p1 = a.z1 * (xa / aa);
            let p2 = a.z2 * (xa / aa);
            BallPoint::new(
                (a.z1 - p1 - sa * (x.z1 - p1)) / denom,
                (a.z2 - p2 - sa * (x.z2 - p2)) / denom,
            )
        };
        BallPoint::new(
            self.u[0][0] * phi.z1 + self.u[0][1] * phi.z2,
            self.u[1][0] * phi.z1 + self.u[1][1] * phi.z2,
        )
    }
}

/// Distance provider returning the exact Siegel Kobayashi distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSiegel;

impl DistanceProvider for ExactSiegel {
    fn bracket(&self, p: &Point, q: &Point) -> Result<DistanceBracket> {
        kobayashi_distance_siegel(p, q).map(DistanceBracket::exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPair {
    pub p: Point,
    pub q: Point,
    pub catlin_lower: f64,
    pub catlin_upper: f64,
    pub kobayashi_exact: f64,
    /// `catlin_upper / kobayashi_exact`.
    pub ratio: f64,
}

/// Fit of `d_K ≥ c · lower − C` over the sampled pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerFit {
    /// Least-squares slope of `d_K` against the Catlin lower bound.
    pub c: f64,
    /// Smallest offset making the inequality hold on every pair.
    #[serde(rename = "C")]
    pub offset: f64,
    /// `d_K − (c · lower − C)`, nonnegative by construction.
    pub max_residual: f64,
    pub mean_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    /// `max(upper/exact, exact/upper)` over all pairs with `exact > 0`.
    #[serde(rename = "A_star")]
    pub a_star: f64,
    pub pair_count: usize,
    pub seed: u64,
    pub lower_fit: LowerFit,
    /// Pairs whose Catlin budget ran out; their upper bounds are still valid.
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub pairs: Vec<ComparisonPair>,
    pub summary: ComparisonSummary,
}

/// Least-squares slope of `y` on `x` (with intercept), and the offset that
/// makes `y ≥ c x − C` hold everywhere.
pub fn fit_lower(xs: &[f64], ys: &[f64]) -> LowerFit {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let offset = xs.iter().zip(ys).map(|(x, y)| c * x - y).fold(0.0, f64::max);
    let res: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (c * x - offset)).collect();
    LowerFit {
        c,
        offset,
        max_residual: res.iter().copied().fold(0.0, f64::max),
        mean_residual: res.iter().sum::<f64>() / n,
    }
}

/// Compares Catlin brackets with the exact Kobayashi distance on `pairs`
/// seeded random pairs of the Siegel domain.
pub fn oracle_compare<D: DistanceProvider>(
    catlin: &D,
    sampler: &BandSampler,
    pairs: usize,
    seed: u64,
    mut progress: impl FnMut(usize),
) -> Result<ComparisonReport> {
    if pairs == 0 {
        return Err(Error::InvalidParameter("pair count must be positive".into()));
    }
    let d = siegel();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(pairs);
    let mut unconverged = 0;
    for i in 0..pairs {
        let p = sampler.sample(&d, &mut rng);
        let q = sampler.sample(&d, &mut rng);
        let b = catlin.bracket(&p, &q)?;
        if !b.converged {
            unconverged += 1;
        }
        let exact = kobayashi_distance_siegel(&p, &q)?;
        out.push(ComparisonPair {
            p,
            q,
            catlin_lower: b.lower,
            catlin_upper: b.upper,
            kobayashi_exact: exact,
            ratio: b.upper / exact,
        });
        progress(i + 1);
    }
    let a_star = out
        .iter()
        .filter(|c| c.kobayashi_exact > 0.0)
        .map(|c| c.ratio.max(1.0 / c.ratio))
        .fold(1.0, f64::max);
    let xs: Vec<f64> = out.iter().map(|c| c.catlin_lower).collect();
    let ys: Vec<f64> = out.iter().map(|c| c.kobayashi_exact).collect();
    Ok(ComparisonReport {
        summary: ComparisonSummary {
            a_star,
            pair_count: out.len(),
            seed,
            lower_fit: fit_lower(&xs, &ys),
            unconverged,
        },
        pairs: out,
    })
}
