//! Gromov products and four-point hyperbolicity estimates.
//!
//! Distances are only known as brackets, so products are intervals: the lower
//! end combines lower, lower and upper bounds, the upper end upper, upper and
//! lower bounds. Hyperbolicity is probed with the four-point condition
//! `(x|y)_o ≥ min((x|z)_o, (y|z)_o) − δ`, evaluated on interval midpoints.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ModelDomain, Point};
use crate::error::{Error, Result};
use crate::geodesic::{vertical_ray, CachedDistance, DistanceProvider};

/// Enclosure of a Gromov product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ProductInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lower - slack <= x && x <= self.upper + slack
    }
}

/// `(x|y)_o = ½[d(x,o) + d(y,o) − d(x,y)]` as an interval, clamped below at 0.
pub fn gromov_product<D: DistanceProvider>(
    o: &Point,
    x: &Point,
    y: &Point,
    provider: &D,
) -> Result<ProductInterval> {
    let xo = provider.bracket(x, o)?;
    let yo = provider.bracket(y, o)?;
    let xy = provider.bracket(x, y)?;
    Ok(ProductInterval {
        lower: (0.5 * (xo.lower + yo.lower - xy.upper)).max(0.0),
        upper: (0.5 * (xo.upper + yo.upper - xy.lower)).max(0.0),
    })
}

/// `min((x|z)_w, (y|z)_w) − (x|y)_w` on interval midpoints; may be negative.
pub fn four_point_defect<D: DistanceProvider>(
    x: &Point,
    y: &Point,
    z: &Point,
    w: &Point,
    provider: &D,
) -> Result<f64> {
    let xz = gromov_product(w, x, z, provider)?.midpoint();
    let yz = gromov_product(w, y, z, provider)?.midpoint();
    let xy = gromov_product(w, x, y, provider)?.midpoint();
    Ok(xz.min(yz) - xy)
}

/// Random interior points near the boundary: `z` uniform in a disk and
/// `log |r_P|` uniform in an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSampler {
    pub radius: f64,
    pub log_depth_min: f64,
    pub log_depth_max: f64,
    /// `Im w` is uniform in `[-im_w_spread, im_w_spread]`; zero pins it to 0.
    pub im_w_spread: f64,
}

impl Default for BandSampler {
    fn default() -> Self {
        Self { radius: 2.0, log_depth_min: -4.0, log_depth_max: 2.0, im_w_spread: 0.0 }
    }
}

impl BandSampler {
    pub fn validate(&self) -> Result<()> {
        let ok = self.radius >= 0.0
            && self.radius.is_finite()
            && self.log_depth_min <= self.log_depth_max
            && self.log_depth_min.is_finite()
            && self.log_depth_max.is_finite()
            && self.im_w_spread >= 0.0
            && self.im_w_spread.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid sampler configuration {self:?}")))
        }
    }

    pub fn sample<R: Rng>(&self, domain: &ModelDomain, rng: &mut R) -> Point {
        let rho = self.radius * rng.gen::<f64>().sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = Complex64::from_polar(rho, theta);
        let log_depth = self.log_depth_min + (self.log_depth_max - self.log_depth_min) * rng.gen::<f64>();
        let im = if self.im_w_spread > 0.0 {
            self.im_w_spread * (2.0 * rng.gen::<f64>() - 1.0)
        } else {
            0.0
        };
        let re = -log_depth.exp() - domain.polynomial().evaluate(z);
        Point::new(z, Complex64::new(re, im))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub samples: usize,
    pub delta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta_hat: f64,
    pub samples: usize,
    pub basepoint: Point,
    /// `(x, y, z, o)` attaining `delta_hat`, if any quadruple had a positive defect.
    pub worst: Option<[Point; 4]>,
    pub stability: Vec<StabilityPoint>,
    pub pool_size: usize,
    pub seed: u64,
    pub definition: String,
}

pub const DELTA_DEFINITION: &str = "four-point delta at a fixed basepoint: max over sampled \
(x, y, z) of min((x|z)_o, (y|z)_o) - (x|y)_o on product-interval midpoints, floored at 0; \
comparable to the thin-triangle delta up to a universal factor";

/// Running maximum of four-point defects with checkpoints.
#[derive(Debug, Clone)]
pub struct DeltaAccumulator {
    delta_hat: f64,
    worst: Option<[Point; 4]>,
    count: usize,
    checkpoints: Vec<usize>,
    stability: Vec<StabilityPoint>,
}

impl DeltaAccumulator {
    /// Records the running maximum after each count in `checkpoints`.
    pub fn new(mut checkpoints: Vec<usize>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Self { delta_hat: 0.0, worst: None, count: 0, checkpoints, stability: Vec::new() }
    }

    pub fn push(&mut self, quad: [Point; 4], defect: f64) {
        if defect > self.delta_hat {
            self.delta_hat = defect;
            self.worst = Some(quad);
        }
        self.count += 1;
        if self.checkpoints.binary_search(&self.count).is_ok() {
            self.stability.push(StabilityPoint { samples: self.count, delta_hat: self.delta_hat });
        }
    }

    pub fn delta_hat(&self) -> f64 {
        self.delta_hat
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Checkpoints `n/4, n/2, n` (rounded up, deduplicated).
pub fn stability_checkpoints(n: usize) -> Vec<usize> {
    let mut v = vec![n.div_ceil(4), n.div_ceil(2), n];
    v.retain(|&c| c > 0);
    v.dedup();
    v
}

/// Maximum four-point defect over explicit quadruples `(x, y, z, w)`, floored at 0.
pub fn delta_over_quadruples<D: DistanceProvider>(quads: &[[Point; 4]], provider: &D) -> Result<f64> {
    let mut acc = DeltaAccumulator::new(Vec::new());
    for q in quads {
        acc.push(*q, four_point_defect(&q[0], &q[1], &q[2], &q[3], provider)?);
    }
    Ok(acc.delta_hat())
}

/// Estimates δ at basepoint `o` from `n` triples drawn from a seeded pool of
/// `pool_size` sampled points. Distances are memoized, so the cost is bounded
/// by the `pool_size (pool_size + 1) / 2` pairs involving the pool and `o`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_delta<D: DistanceProvider>(
    domain: &ModelDomain,
    o: &Point,
    sampler: &BandSampler,
    n: usize,
    pool_size: usize,
    seed: u64,
    provider: &D,
    mut progress: impl FnMut(usize, usize),
) -> Result<DeltaReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("quadruple count must be at least 1".into()));
    }
    if pool_size == 0 {
        return Err(Error::InvalidParameter("pool size must be at least 1".into()));
    }
    sampler.validate()?;
    domain.depth(o)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Point> = (0..pool_size).map(|_| sampler.sample(domain, &mut rng)).collect();
    let triples: Vec<[usize; 3]> = (0..n)
        .map(|_| {
            [
                rng.gen_range(0..pool_size),
                rng.gen_range(0..pool_size),
                rng.gen_range(0..pool_size),
            ]
        })
        .collect();
    let cached = CachedDistance::new(provider);
    let mut acc = DeltaAccumulator::new(stability_checkpoints(n));
    for (i, t) in triples.iter().enumerate() {
        let (x, y, z) = (pool[t[0]], pool[t[1]], pool[t[2]]);
        let defect = four_point_defect(&x, &y, &z, o, &cached)?;
        acc.push([x, y, z, *o], defect);
        progress(i + 1, n);
    }
    Ok(DeltaReport {
        delta_hat: acc.delta_hat,
        samples: acc.count,
        basepoint: *o,
        worst: acc.worst,
        stability: acc.stability,
        pool_size,
        seed,
        definition: DELTA_DEFINITION.to_string(),
    })
}

/// A vertical ray `t ↦ (z, w − a e^{−t})` over a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub foot: Point,
    pub a: f64,
}

impl Ray {
    pub fn new(foot: Point, a: f64) -> Self {
        Self { foot, a }
    }

    pub fn at(&self, domain: &ModelDomain, t: f64) -> Result<Point> {
        vertical_ray(domain, &self.foot, self.a, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductRow {
    pub depth: f64,
    pub lower: f64,
    pub upper: f64,
    /// `½[U(p,o) + U(q,o) − U(p,q)]`, the product computed from upper bounds
    /// only; not certified, but insensitive to the looseness of the lower bound.
    pub upper_estimate: f64,
}

/// Basepoint used when none is given: the midpoint of the two rays at `t = 0`.
pub fn default_product_basepoint(domain: &ModelDomain, plus: &Ray, minus: &Ray) -> Result<Point> {
    let o = plus.at(domain, 0.0)?.lerp(&minus.at(domain, 0.0)?, 0.5);
    domain.depth(&o)?;
    Ok(o)
}

/// `(σ⁺(t) | σ⁻(t))_o` for each depth `t`.
pub fn boundary_product_experiment<D: DistanceProvider>(
    domain: &ModelDomain,
    plus: &Ray,
    minus: &Ray,
    depths: &[f64],
    basepoint: Option<Point>,
    provider: &D,
) -> Result<Vec<ProductRow>> {
    let o = match basepoint {
        Some(o) => {
            domain.depth(&o)?;
            o
        }
        None => default_product_basepoint(domain, plus, minus)?,
    };
    depths
        .iter()
        .map(|&t| {
            let p = plus.at(domain, t)?;
            let q = minus.at(domain, t)?;
            let po = provider.bracket(&p, &o)?;
            let qo = provider.bracket(&q, &o)?;
            let pq = provider.bracket(&p, &q)?;
            Ok(ProductRow {
                depth: t,
                lower: (0.5 * (po.lower + qo.lower - pq.upper)).max(0.0),
                upper: (0.5 * (po.upper + qo.upper - pq.lower)).max(0.0),
                upper_estimate: (0.5 * (po.upper + qo.upper - pq.upper)).max(0.0),
            })
        })
        .collect()
}
