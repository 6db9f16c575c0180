//! Finsler lengths of paths, distance brackets and quasi-geodesic checks.
//!
//! Distances of the Catlin metric are not known in closed form away from
//! vertical lines, so every distance is reported as a [`DistanceBracket`]:
//! the lower end is the logarithmic depth estimate
//! `|log(r_P(p) / r_P(q))|`, which holds for every piecewise-C¹ curve, and the
//! upper end is the length of the best path the optimizer found.

mod optimize;
mod quadrature;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::domain::{ModelDomain, Point};
use crate::error::{Error, Result};

pub use optimize::{solve_geodesic, Geodesic, SolverOptions};
pub use quadrature::{gl8, Interpolation, GL8_NODES, GL8_WEIGHTS, PANEL_RATIO};

use quadrature::{segment_length, segment_point, segment_velocity, SegmentFault};

/// Tolerance on `r_P = 0` for points passed as boundary feet.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A piecewise curve in `Ω_P` through control points, with an attached
/// parameter grid. Segments are straight unless built with
/// [`Interpolation::Lifted`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath {
    points: Vec<Point>,
    params: Vec<f64>,
    #[serde(default)]
    interpolation: Interpolation,
}

impl PiecewisePath {
    /// Control points with parameters `t_i`. Needs at least two points,
    /// strictly increasing parameters and every point interior.
    pub fn new(domain: &ModelDomain, points: Vec<Point>, params: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("a path needs at least two control points".into()));
        }
        if params.len() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "{} parameters for {} control points",
                params.len(),
                points.len()
            )));
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) || params.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("path parameters must be strictly increasing".into()));
        }
        for p in &points {
            domain.depth(p)?;
        }
        Ok(Self { points, params, interpolation: Interpolation::Straight })
    }

    /// The same control points joined by segments of the given kind.
    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Control points on the uniform grid `0, 1/N, …, 1`.
    pub fn uniform(domain: &ModelDomain, points: Vec<Point>) -> Result<Self> {
        let n = points.len().saturating_sub(1).max(1) as f64;
        let params = (0..points.len()).map(|i| i as f64 / n).collect();
        Self::new(domain, points, params)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }

    /// Position at parameter `t`, clamped to the parameter range.
    pub fn point_at(&self, domain: &ModelDomain, t: f64) -> Point {
        let (t0, t1) = self.param_range();
        let t = t.clamp(t0, t1);
        let i = match self.params.partition_point(|&s| s <= t) {
            0 => 0,
            n if n >= self.params.len() => self.params.len() - 2,
            n => n - 1,
        };
        let (a, b) = (self.params[i], self.params[i + 1]);
        segment_point(domain, &self.points[i], &self.points[i + 1], (t - a) / (b - a), self.interpolation)
    }

    /// Same control points with parameters set to cumulative Finsler length.
    ///
    /// Zero-length segments are given a tiny positive increment so the grid
    /// stays strictly increasing.
    pub fn arclength_parameterized(&self, domain: &ModelDomain) -> Result<Self> {
        let mut params = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        params.push(0.0);
        for (i, w) in self.points.windows(2).enumerate() {
            let len = segment_length(domain, &w[0], &w[1], self.interpolation).map_err(|f| fault_error(f, i))?;
            let next = acc + len;
            acc = if next > acc { next } else { acc + acc.abs().max(1.0) * 1e-15 };
            params.push(acc);
        }
        Ok(Self { points: self.points.clone(), params, interpolation: self.interpolation })
    }

    /// Inserts the midpoint of every segment. Lifted segments are split on
    /// the curve, so the path itself is unchanged.
    pub fn refined(&self, domain: &ModelDomain) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len() - 1);
        let mut params = Vec::with_capacity(2 * self.points.len() - 1);
        for i in 0..self.segments() {
            points.push(self.points[i]);
            params.push(self.params[i]);
            points.push(segment_point(domain, &self.points[i], &self.points[i + 1], 0.5, self.interpolation));
            params.push(0.5 * (self.params[i] + self.params[i + 1]));
        }
        points.push(self.end());
        params.push(*self.params.last().unwrap());
        Self { points, params, interpolation: self.interpolation }
    }
}

fn fault_error(f: SegmentFault, segment: usize) -> Error {
    Error::PathExitsDomain { segment, r: f.r }
}

/// Certified sandwich for a distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DistanceBracket {
    pub fn exact(d: f64) -> Self {
        Self { lower: d, upper: d, iterations: 0, converged: true }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Finsler length of `path` by composite eight-node Gauss–Legendre
/// quadrature, with panels fine enough that `|r_P|` varies by at most
/// [`PANEL_RATIO`] on each.
pub fn path_length(domain: &ModelDomain, path: &PiecewisePath) -> Result<f64> {
    path.points
        .windows(2)
        .enumerate()
        .map(|(i, w)| segment_length(domain, &w[0], &w[1], path.interpolation).map_err(|f| fault_error(f, i)))
        .sum()
}

fn check_foot(domain: &ModelDomain, foot: &Point) -> Result<()> {
    let r = domain.defining_value(foot);
    if r.abs() > BOUNDARY_TOL {
        return Err(Error::NotBoundary { r });
    }
    Ok(())
}

/// `σ(t) = (z, w - a e^{-t})` over the boundary point `foot = (z, w)`.
pub fn vertical_ray(domain: &ModelDomain, foot: &Point, a: f64, t: f64) -> Result<Point> {
    check_foot(domain, foot)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("ray height {a} must be > 0")));
    }
    Ok(Point::new(foot.z, foot.w - a * (-t).exp()))
}

/// The vertical ray on `[s, t]` sampled at `segments + 1` equally spaced
/// parameters; the path's parameter is the ray parameter.
pub fn vertical_ray_path(
    domain: &ModelDomain,
    foot: &Point,
    a: f64,
    s: f64,
    t: f64,
    segments: usize,
) -> Result<PiecewisePath> {
    if !(t > s) || segments == 0 {
        return Err(Error::InvalidParameter("ray interval must satisfy s < t".into()));
    }
    let params: Vec<f64> = (0..=segments)
        .map(|i| s + (t - s) * i as f64 / segments as f64)
        .collect();
    let points = params
        .iter()
        .map(|&u| vertical_ray(domain, foot, a, u))
        .collect::<Result<Vec<_>>>()?;
    PiecewisePath::new(domain, points, params)
}

/// `|log(r_P(p) / r_P(q))|`, a lower bound for the Catlin distance.
pub fn distance_lower_bound(domain: &ModelDomain, p: &Point, q: &Point) -> Result<f64> {
    let (a, b) = (domain.depth(p)?, domain.depth(q)?);
    Ok((a.max(b) / a.min(b)).ln())
}

/// Bracket for the Catlin distance between `p` and `q`.
///
/// Running out of sweeps yields [`Error::BudgetExhausted`] carrying the best
/// bracket found so far.
pub fn estimate_distance(
    domain: &ModelDomain,
    p: &Point,
    q: &Point,
    options: &SolverOptions,
) -> Result<DistanceBracket> {
    let g = solve_geodesic(domain, p, q, options)?;
    if g.exhausted {
        Err(Error::BudgetExhausted { best: g.bracket })
    } else {
        Ok(g.bracket)
    }
}

/// One line of a geodesic dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumpRow {
    pub t: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub r: f64,
    pub metric: f64,
}

/// Control points of `path` with the metric of the parameter velocity.
/// The velocity at the last point is taken from the last segment.
pub fn dump_rows(domain: &ModelDomain, path: &PiecewisePath) -> Result<Vec<DumpRow>> {
    let n = path.points.len();
    (0..n)
        .map(|i| {
            let j = i.min(n - 2);
            let (a, b) = (&path.points[j], &path.points[j + 1]);
            let dt = path.params[j + 1] - path.params[j];
            let t = if i == j { 0.0 } else { 1.0 };
            let v = segment_velocity(domain, a, b, t, path.interpolation).scaled((1.0 / dt).into());
            let p = &path.points[i];
            Ok(DumpRow {
                t: path.params[i],
                z_re: p.z.re,
                z_im: p.z.im,
                w_re: p.w.re,
                w_im: p.w.im,
                r: domain.defining_value(p),
                metric: domain.catlin_metric(p, &v)?,
            })
        })
        .collect()
}

/// Source of distance brackets between interior points.
pub trait DistanceProvider {
    fn bracket(&self, p: &Point, q: &Point) -> Result<DistanceBracket>;
}

impl<T: DistanceProvider + ?Sized> DistanceProvider for &T {
    fn bracket(&self, p: &Point, q: &Point) -> Result<DistanceBracket> {
        (**self).bracket(p, q)
    }
}

/// Catlin distance brackets from the path optimizer.
///
/// When the sweep budget runs out the best bracket so far is returned (it is
/// still a valid sandwich, flagged `converged = false`); use
/// [`CatlinDistance::strict`] to surface [`Error::BudgetExhausted`] instead.
#[derive(Debug, Clone)]
pub struct CatlinDistance {
    pub domain: ModelDomain,
    pub options: SolverOptions,
    pub strict: bool,
}

impl CatlinDistance {
    pub fn new(domain: ModelDomain, options: SolverOptions) -> Self {
        Self { domain, options, strict: false }
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}

impl DistanceProvider for CatlinDistance {
    fn bracket(&self, p: &Point, q: &Point) -> Result<DistanceBracket> {
        match estimate_distance(&self.domain, p, q, &self.options) {
            Err(Error::BudgetExhausted { best }) if !self.strict => Ok(best),
            other => other,
        }
    }
}

type PointKey = [u64; 4];

fn point_key(p: &Point) -> PointKey {
    [p.z.re.to_bits(), p.z.im.to_bits(), p.w.re.to_bits(), p.w.im.to_bits()]
}

fn pair_key(p: &Point, q: &Point) -> (PointKey, PointKey) {
    let (a, b) = (point_key(p), point_key(q));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Memoizes an inner provider on the exact bit patterns of the unordered
/// pair; the inner provider is called once per pair, in the order first seen.
#[derive(Debug)]
pub struct CachedDistance<P> {
    inner: P,
    cache: Mutex<HashMap<(PointKey, PointKey), DistanceBracket>>,
}

impl<P> CachedDistance<P> {
    pub fn new(inner: P) -> Self {
        Self { inner, cache: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: DistanceProvider> DistanceProvider for CachedDistance<P> {
    fn bracket(&self, p: &Point, q: &Point) -> Result<DistanceBracket> {
        let key = pair_key(p, q);
        if let Some(b) = self.cache.lock().unwrap().get(&key) {
            return Ok(*b);
        }
        let b = self.inner.bracket(p, q)?;
        self.cache.lock().unwrap().insert(key, b);
        Ok(b)
    }
}

/// A pair of parameters at which the quasi-geodesic inequalities fail worst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiGeodesicViolation {
    pub s: f64,
    pub t: f64,
    pub bracket: DistanceBracket,
    /// Positive when an inequality is violated.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiGeodesicReport {
    pub pass: bool,
    pub pairs: usize,
    pub worst: Option<QuasiGeodesicViolation>,
}

/// Minimum number of sampled parameters in a quasi-geodesic check.
pub const QGEO_MIN_SAMPLES: usize = 20;

/// Checks `A⁻¹|t−s| − B ≤ d(γ(s), γ(t)) ≤ A|t−s| + B` on all pairs of
/// `samples` (at least 20) equally spaced parameters of `path`.
///
/// The upper inequality is tested with the bracket's upper end and the lower
/// inequality with its lower end, so a pass is certified by the brackets.
/// Comparisons allow a roundoff slack of `1e-9 · (1 + bound)`.
pub fn is_quasi_geodesic<D: DistanceProvider>(
    domain: &ModelDomain,
    path: &PiecewisePath,
    a: f64,
    b: f64,
    provider: &D,
    samples: usize,
) -> Result<QuasiGeodesicReport> {
    if !(a >= 1.0) || !(b >= 0.0) {
        return Err(Error::InvalidParameter(format!("need A >= 1 and B >= 0, got ({a}, {b})")));
    }
    let n = samples.max(QGEO_MIN_SAMPLES);
    let (t0, t1) = path.param_range();
    let ts: Vec<f64> = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
    let pts: Vec<Point> = ts.iter().map(|&t| path.point_at(domain, t)).collect();
    let mut worst: Option<QuasiGeodesicViolation> = None;
    let mut pass = true;
    let mut pairs = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = ts[j] - ts[i];
            let d = provider.bracket(&pts[i], &pts[j])?;
            let hi = a * gap + b;
            let lo = gap / a - b;
            let over = d.upper - hi - 1e-9 * (1.0 + hi.abs());
            let under = lo - d.lower - 1e-9 * (1.0 + lo.abs());
            let excess = over.max(under);
            pairs += 1;
            if excess > 0.0 {
                pass = false;
            }
            if worst.map_or(true, |w| excess > w.excess) {
                worst = Some(QuasiGeodesicViolation { s: ts[i], t: ts[j], bracket: d, excess });
            }
        }
    }
    Ok(QuasiGeodesicReport { pass, pairs, worst })
}
