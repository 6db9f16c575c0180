//! Length minimization over paths of lifted segments.
//!
//! Starting paths are the direct segment and composites that drop vertically
//! to a deep level, cross at constant depth and climb back up; the shortest
//! one is kept. At each refinement level the interior control points are
//! moved by L-BFGS on all points at once, then polished by cyclic pattern
//! search. The length is a sum of norms that are not differentiable where a
//! segment is purely vertical or purely horizontal, and optimal paths sit on
//! those kinks, so L-BFGS works on a smoothed length with decreasing
//! smoothing while pattern search uses the exact one. Refinement splits every
//! segment on the curve, so the length never increases from one level to the
//! next.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::{segment_point, smoothed_lifted_length, Interpolation, SegmentFault};
use super::{distance_lower_bound, DistanceBracket, PiecewisePath};
use crate::domain::{ModelDomain, Point, Tangent, INTERIOR_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Maximum number of pattern-search sweeps over all refinement levels.
    pub budget: usize,
    /// Refinement stops before the segment count would exceed this.
    pub max_segments: usize,
    /// Starting paths are subdivided until they have at least this many segments.
    pub min_segments: usize,
    /// Halvings of a control point's step before it is frozen.
    pub shrink_levels: u32,
    /// Initial step, in units of the local metric.
    pub initial_step: f64,
    /// Relative improvement below which a refinement counts as converged.
    pub rel_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            budget: 3000,
            max_segments: 256,
            min_segments: 8,
            shrink_levels: 12,
            initial_step: 0.25,
            rel_tol: 1e-4,
        }
    }
}

impl SolverOptions {
    pub fn with_budget(budget: usize) -> Self {
        Self { budget, ..Self::default() }
    }
}

/// Best path found between two points and the resulting bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    /// Parameterized by cumulative length.
    pub path: PiecewisePath,
    pub bracket: DistanceBracket,
    /// The sweep budget ran out before convergence.
    pub exhausted: bool,
}

const MAX_STEP: f64 = 2.0;

/// Sweeps over which pattern search must gain at least `STALL_FACTOR · rel_tol`
/// (relative) to keep going at one level.
const STALL_WINDOW: usize = 50;
const STALL_FACTOR: f64 = 1e-2;
/// Quasi-Newton iterations over which the same gain is required.
const QN_STALL_WINDOW: usize = 10;
const QN_MEMORY: usize = 8;
/// Quasi-Newton iterations between chart rebuilds.
const QN_RESTART: usize = 25;
/// Largest coordinate change of the first quasi-Newton step in a chart.
const QN_FIRST_STEP: f64 = 0.1;
const FD_STEP: f64 = 1e-6;

enum QnExit {
    Restart,
    Budget,
    Done,
}

/// Coordinates around a control point `o`: `u₀ + i u₁` moves `z` along the
/// horizontal lift in units of the local metric, `u₂` is the log of the
/// depth relative to `o` and `u₃` moves `Im w` in units of the depth. Every
/// placed point is interior.
struct Chart {
    o: Point,
    dp: Complex64,
    sigma: f64,
    depth: f64,
}

impl Chart {
    fn at(domain: &ModelDomain, o: &Point) -> Option<Self> {
        let frame = domain.frame(o).ok()?;
        let lift = Tangent::new(Complex64::new(1.0, 0.0), -frame.dp * 2.0);
        let m = frame.eval(&lift);
        if !(m > 0.0) || !m.is_finite() {
            return None;
        }
        Some(Self { o: *o, dp: frame.dp, sigma: 1.0 / m, depth: frame.depth })
    }

    fn place(&self, domain: &ModelDomain, u: &[f64]) -> Point {
        let dz = Complex64::new(u[0], u[1]) * self.sigma;
        let z = self.o.z + dz;
        let depth = self.depth * u[2].exp();
        let im = self.o.w.im - (2.0 * self.dp * dz).im + self.depth * u[3];
        Point::new(z, Complex64::new(-domain.polynomial().evaluate(z) - depth, im))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smoothing schedule on the first level, as the total length each
/// smoothed norm may add over the whole chain.
const FIRST_SMOOTHING: [f64; 2] = [0.1, 0.01];
/// Smoothing on refined levels, which start close to optimal.
const FINE_SMOOTHING: [f64; 1] = [0.001];

/// Control points joined by lifted segments, with cached segment lengths.
/// With `mu > 0` the lengths are smoothed (see `smoothed_lifted_length`).
struct Chain<'a> {
    domain: &'a ModelDomain,
    mu: f64,
    pts: Vec<Point>,
    seg: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn new(domain: &'a ModelDomain, pts: Vec<Point>) -> Option<Self> {
        Self::smoothed(domain, pts, 0.0)
    }

    fn smoothed(domain: &'a ModelDomain, pts: Vec<Point>, mu: f64) -> Option<Self> {
        let seg = pts
            .windows(2)
            .map(|w| smoothed_lifted_length(domain, &w[0], &w[1], mu).ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Self { domain, mu, pts, seg })
    }

    fn with_mu(self, mu: f64) -> Option<Self> {
        Self::smoothed(self.domain, self.pts, mu)
    }

    fn total(&self) -> f64 {
        self.seg.iter().sum()
    }

    fn segments(&self) -> usize {
        self.seg.len()
    }

    fn interior(&self, p: &Point) -> bool {
        self.domain.defining_value(p) < -INTERIOR_TOL
    }

    fn len_of(&self, a: &Point, b: &Point) -> std::result::Result<f64, SegmentFault> {
        smoothed_lifted_length(self.domain, a, b, self.mu)
    }

    /// Splits every segment at its midpoint on the curve.
    fn refined(&self) -> Option<Self> {
        let mut pts = Vec::with_capacity(2 * self.pts.len() - 1);
        for w in self.pts.windows(2) {
            pts.push(w[0]);
            pts.push(segment_point(self.domain, &w[0], &w[1], 0.5, Interpolation::Lifted));
        }
        pts.push(*self.pts.last()?);
        Self::smoothed(self.domain, pts, self.mu)
    }

    /// Unit-metric moves at control point `i`: two horizontal moves that
    /// carry `w` along `dw = -2 ∂P/∂z dz` (keeping `r_P` fixed to first
    /// order) and two vertical moves.
    fn basis(&self, i: usize) -> Option<[Tangent; 4]> {
        let frame = self.domain.frame(&self.pts[i]).ok()?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let im = Complex64::new(0.0, 1.0);
        let lift = Tangent::new(one, -frame.dp * 2.0);
        let m = frame.eval(&lift);
        if !(m > 0.0) {
            return None;
        }
        Some([
            lift.scaled((one / m).into()),
            lift.scaled((im / m).into()),
            Tangent::new(zero, one * frame.depth),
            Tangent::new(zero, im * frame.depth),
        ])
    }

    /// Pattern-search moves for control point `i`. Returns whether a move
    /// was accepted.
    fn try_move(&mut self, i: usize, h: f64, last_dir: &mut usize) -> bool {
        let Some(b) = self.basis(i) else {
            return false;
        };
        let minus = |t: Tangent| t.scaled((-1.0).into());
        let dirs = [b[0], minus(b[0]), b[1], minus(b[1]), b[2], minus(b[2]), b[3], minus(b[3])];
        let old = self.seg[i - 1] + self.seg[i];
        let target = old * (1.0 - 1e-13);
        for k in 0..dirs.len() {
            let d = (*last_dir + k) % dirs.len();
            let cand = self.pts[i].offset(&dirs[d], h);
            if !self.interior(&cand) {
                continue;
            }
            let Ok(a) = self.len_of(&self.pts[i - 1], &cand) else { continue };
            if a >= target {
                continue;
            }
            let Ok(b) = self.len_of(&cand, &self.pts[i + 1]) else { continue };
            if a + b < target {
                self.pts[i] = cand;
                self.seg[i - 1] = a;
                self.seg[i] = b;
                *last_dir = d;
                return true;
            }
        }
        false
    }

    /// Local coordinates around every interior control point.
    fn charts(&self) -> Option<Vec<Chart>> {
        (1..self.pts.len() - 1).map(|i| Chart::at(self.domain, &self.pts[i])).collect()
    }

    /// Control points placed by `charts` at coordinates `u`, or `None` if a
    /// segment cannot be measured.
    fn placed(&self, charts: &[Chart], u: &[f64]) -> Option<Self> {
        let mut pts = self.pts.clone();
        for (i, chart) in charts.iter().enumerate() {
            pts[i + 1] = chart.place(self.domain, &u[4 * i..4 * i + 4]);
        }
        Self::smoothed(self.domain, pts, self.mu)
    }

    /// Central-difference gradient of the total length in chart coordinates.
    fn gradient(&self, charts: &[Chart], u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        for (i, chart) in charts.iter().enumerate() {
            let (prev, next) = (&self.pts[i], &self.pts[i + 2]);
            let mid = self.seg[i] + self.seg[i + 1];
            for k in 0..4 {
                let eval = |h: f64| {
                    let mut v = [u[4 * i], u[4 * i + 1], u[4 * i + 2], u[4 * i + 3]];
                    v[k] += h;
                    let c = chart.place(self.domain, &v);
                    Some(self.len_of(prev, &c).ok()? + self.len_of(&c, next).ok()?)
                };
                g[4 * i + k] = match (eval(FD_STEP), eval(-FD_STEP)) {
                    (Some(a), Some(b)) => (a - b) / (2.0 * FD_STEP),
                    (Some(a), None) => (a - mid) / FD_STEP,
                    (None, Some(b)) => (mid - b) / FD_STEP,
                    (None, None) => 0.0,
                };
            }
        }
        g
    }

    /// L-BFGS over all interior control points, one sweep per iteration,
    /// restarted in fresh charts every `QN_RESTART` iterations. Returns
    /// `true` if the budget ran out.
    fn quasi_newton(&mut self, opts: &SolverOptions, sweeps_left: &mut usize) -> bool {
        if self.pts.len() <= 2 {
            return false;
        }
        let mut history = VecDeque::with_capacity(QN_STALL_WINDOW + 1);
        loop {
            let Some(charts) = self.charts() else {
                return false;
            };
            match self.quasi_newton_run(&charts, opts, sweeps_left, &mut history) {
                QnExit::Restart => continue,
                QnExit::Budget => return true,
                QnExit::Done => return false,
            }
        }
    }

    fn quasi_newton_run(
        &mut self,
        charts: &[Chart],
        opts: &SolverOptions,
        sweeps_left: &mut usize,
        history: &mut VecDeque<f64>,
    ) -> QnExit {
        let mut u = vec![0.0; 4 * charts.len()];
        let mut g = self.gradient(charts, &u);
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        for _ in 0..QN_RESTART {
            if *sweeps_left == 0 {
                return QnExit::Budget;
            }
            *sweeps_left -= 1;
            let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
            let mut alphas = Vec::with_capacity(memory.len());
            for (s, y, rho) in memory.iter().rev() {
                let a = rho * dot(s, &d);
                d.iter_mut().zip(y).for_each(|(dj, yj)| *dj -= a * yj);
                alphas.push(a);
            }
            if let Some((s, y, _)) = memory.back() {
                let gamma = dot(s, y) / dot(y, y);
                d.iter_mut().for_each(|x| *x *= gamma);
            } else {
                // first step moves no coordinate by more than QN_FIRST_STEP
                let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if gmax > 0.0 {
                    let scale = (QN_FIRST_STEP / gmax).min(1.0);
                    d.iter_mut().for_each(|x| *x *= scale);
                }
            }
            for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &d);
                d.iter_mut().zip(s).for_each(|(dj, sj)| *dj += (a - b) * sj);
            }
            let slope = dot(&g, &d);
            if !(slope < 0.0) {
                return if memory.is_empty() { QnExit::Done } else { QnExit::Restart };
            }
            let f0 = self.total();
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                if let Some(c) = self.placed(charts, &trial) {
                    if c.total() <= f0 + 1e-4 * step * slope {
                        accepted = Some((trial, c));
                        break;
                    }
                }
                step *= 0.5;
            }
            let Some((trial, c)) = accepted else {
                return if memory.is_empty() { QnExit::Done } else { QnExit::Restart };
            };
            self.pts = c.pts;
            self.seg = c.seg;
            let g_new = self.gradient(charts, &trial);
            let s: Vec<f64> = trial.iter().zip(&u).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                if memory.len() == QN_MEMORY {
                    memory.pop_front();
                }
                memory.push_back((s, y, 1.0 / sy));
            }
            u = trial;
            g = g_new;
            history.push_back(f0);
            if history.len() > QN_STALL_WINDOW {
                let old = history.pop_front().unwrap_or(f0);
                if old - self.total() <= STALL_FACTOR * opts.rel_tol * old {
                    return QnExit::Done;
                }
            }
        }
        QnExit::Restart
    }

    /// Cyclic pattern search until every interior point is frozen, progress
    /// stalls or the budget runs out. Returns `true` if the budget ran out.
    fn descend(&mut self, opts: &SolverOptions, sweeps_left: &mut usize) -> bool {
        let n = self.pts.len();
        if n <= 2 {
            return false;
        }
        let h_min = opts.initial_step / 2f64.powi(opts.shrink_levels as i32);
        let mut h = vec![opts.initial_step; n];
        let mut frozen = vec![false; n];
        frozen[0] = true;
        frozen[n - 1] = true;
        let mut last_dir = vec![0usize; n];
        let mut history = VecDeque::with_capacity(STALL_WINDOW + 1);
        loop {
            if frozen.iter().all(|&f| f) {
                return false;
            }
            if *sweeps_left == 0 {
                return true;
            }
            *sweeps_left -= 1;
            let before = self.total();
            for i in 1..n - 1 {
                if frozen[i] {
                    continue;
                }
                if self.try_move(i, h[i], &mut last_dir[i]) {
                    h[i] = (h[i] * 2.0).min(MAX_STEP);
                    for nb in [i - 1, i + 1] {
                        if nb > 0 && nb < n - 1 && frozen[nb] {
                            frozen[nb] = false;
                            h[nb] = (h[i] * 0.25).max(4.0 * h_min);
                        }
                    }
                } else {
                    h[i] *= 0.5;
                    if h[i] < h_min {
                        frozen[i] = true;
                    }
                }
            }
            history.push_back(before);
            if history.len() > STALL_WINDOW {
                let old = history.pop_front().unwrap_or(before);
                if old - self.total() <= STALL_FACTOR * opts.rel_tol * old {
                    return false;
                }
            }
        }
    }

    /// Quasi-Newton on smoothed lengths with decreasing smoothing, then
    /// pattern search on the exact length. Keeps the start if the smoothed
    /// stage made the exact length worse.
    fn optimize(self, smoothing: &[f64], opts: &SolverOptions, sweeps_left: &mut usize) -> (Self, bool) {
        let start = self.total();
        let domain = self.domain;
        let backup = self.pts.clone();
        let mut chain = self;
        let mut exhausted = false;
        for &total in smoothing {
            let mu = total / chain.segments() as f64;
            let Some(mut c) = chain.with_mu(mu) else {
                return (Self::new(domain, backup).expect("start chain is feasible"), false);
            };
            exhausted = c.quasi_newton(opts, sweeps_left);
            chain = c;
            if exhausted {
                break;
            }
        }
        let mut chain = match chain.with_mu(0.0) {
            Some(c) if c.total() <= start => c,
            _ => Self::new(domain, backup).expect("start chain is feasible"),
        };
        if !exhausted {
            exhausted = chain.descend(opts, sweeps_left);
        }
        (chain, exhausted)
    }
}

/// Drop to depth `level` over `p`, cross at that depth, climb up to `q`.
fn lift_waypoints(domain: &ModelDomain, p: &Point, q: &Point, level: f64) -> [Point; 4] {
    let down = |x: &Point| Point::new(x.z, x.w - (level + domain.defining_value(x)));
    [*p, down(p), down(q), *q]
}

fn initial_chain<'a>(domain: &'a ModelDomain, p: &Point, q: &Point, opts: &SolverOptions) -> Option<Chain<'a>> {
    let mut best = Chain::new(domain, vec![*p, *q]);
    let deepest = domain.depth(p).ok()?.max(domain.depth(q).ok()?);
    let base = deepest.max(0.5) * 2.0;
    for k in -4..=4 {
        let level = base * 2f64.powi(k);
        if level < deepest {
            continue;
        }
        let way = lift_waypoints(domain, p, q, level);
        if let Some(c) = Chain::new(domain, way.to_vec()) {
            if best.as_ref().map_or(true, |b| c.total() < b.total()) {
                best = Some(c);
            }
        }
    }
    let mut chain = best?;
    while chain.segments() < opts.min_segments {
        chain = chain.refined()?;
    }
    Some(chain)
}

/// Minimizes path length between `p` and `q`.
pub fn solve_geodesic(domain: &ModelDomain, p: &Point, q: &Point, opts: &SolverOptions) -> Result<Geodesic> {
    let lower = distance_lower_bound(domain, p, q)?;
    if p == q {
        return Ok(Geodesic {
            path: PiecewisePath::new(domain, vec![*p, *q], vec![0.0, 1.0])?,
            bracket: DistanceBracket::exact(0.0),
            exhausted: false,
        });
    }
    let mut chain = initial_chain(domain, p, q, opts)
        .ok_or_else(|| Error::InvalidParameter("no feasible starting path between the endpoints".into()))?;
    let tight = |len: f64| len - lower <= 0.5 * opts.rel_tol * len;

    let mut sweeps_left = opts.budget;
    let mut converged = tight(chain.total());
    let mut exhausted = false;
    if !converged {
        (chain, exhausted) = chain.optimize(&FIRST_SMOOTHING, opts, &mut sweeps_left);
        converged = tight(chain.total());
    }
    while !exhausted && !converged && 2 * chain.segments() <= opts.max_segments {
        let Some(start) = chain.refined() else { break };
        let prev = chain.total();
        let finer;
        (finer, exhausted) = start.optimize(&FINE_SMOOTHING, opts, &mut sweeps_left);
        let len = finer.total();
        converged = prev - len < opts.rel_tol * prev || tight(len);
        if len <= prev {
            chain = finer;
        }
    }

    // quadrature can round below the lower bound on exact vertical geodesics
    let upper = chain.total().max(lower);
    let path = PiecewisePath::uniform(domain, chain.pts)?
        .with_interpolation(Interpolation::Lifted)
        .arclength_parameterized(domain)?;
    Ok(Geodesic {
        path,
        bracket: DistanceBracket {
            lower,
            upper,
            iterations: opts.budget - sweeps_left,
            converged: converged && !exhausted,
        },
        exhausted,
    })
}
