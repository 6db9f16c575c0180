//! Eight-node Gauss–Legendre quadrature of Finsler lengths along the two
//! kinds of path segment.
//!
//! A straight segment interpolates linearly in `(z, w)`. A lifted segment
//! interpolates `z` linearly and moves `w` along `dw = -2 ∂P/∂z dz` plus a
//! linear correction that lands it on the end point:
//!
//! ```text
//! w(t) = w_a + t (w_b - w_a) + L(t) - t L(1),   L(t) = -2 ∫_0^t ∂P/∂z(z(s)) Δz ds.
//! ```
//!
//! Along a lifted segment `r_P` is the linear interpolation of its end
//! values and `w' + 2 ∂P/∂z z' = c` is constant, so the metric reduces to
//! `|c| / |r_P(t)| + |Δz| Σ_l (A_l / |r_P|)^{1/l}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{ModelDomain, Point, Tangent};

/// Nodes on `[0, 1]`.
pub const GL8_NODES: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];

/// Weights on `[0, 1]` (sum to 1).
pub const GL8_WEIGHTS: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

/// `∫_0^1 f(t) dt` by the eight-node rule.
pub fn gl8<F: FnMut(f64) -> f64>(mut f: F) -> f64 {
    GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS.iter())
        .map(|(&t, &w)| w * f(t))
        .sum()
}

/// Largest ratio of `|r_P|` values sampled on one quadrature panel.
pub const PANEL_RATIO: f64 = 1.5;

/// Panels are not split more than this many times.
const MAX_PANEL_SPLITS: u32 = 48;

/// A sample point has `r_P ≥ -1e-14`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SegmentFault {
    pub r: f64,
}

fn depth_at(domain: &ModelDomain, p: &Point) -> Result<f64, SegmentFault> {
    domain.depth(p).map_err(|e| match e {
        crate::Error::BoundaryPoint { r } => SegmentFault { r },
        _ => SegmentFault { r: f64::NAN },
    })
}

/// How consecutive control points of a path are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Linear in `(z, w)`.
    #[default]
    Straight,
    /// Linear in `z`, with `w` following the level sets of `r_P` (see the module docs).
    Lifted,
}

/// Length of the segment `a → b` under the given interpolation rule.
pub(crate) fn segment_length(
    domain: &ModelDomain,
    a: &Point,
    b: &Point,
    interpolation: Interpolation,
) -> Result<f64, SegmentFault> {
    match interpolation {
        Interpolation::Straight => straight_length(domain, a, b),
        Interpolation::Lifted => lifted_length(domain, a, b),
    }
}

/// Point at parameter `t ∈ [0, 1]` of the segment `a → b`.
pub(crate) fn segment_point(domain: &ModelDomain, a: &Point, b: &Point, t: f64, interpolation: Interpolation) -> Point {
    match interpolation {
        Interpolation::Straight => a.lerp(b, t),
        Interpolation::Lifted => {
            let dz = b.z - a.z;
            let z = a.z + dz * t;
            let poly = domain.polynomial();
            let lift_re = -(poly.evaluate(z) - poly.evaluate(a.z)) + t * (poly.evaluate(b.z) - poly.evaluate(a.z));
            let lift_im = -2.0 * (lift_integral(domain, a.z, dz, t) - lift_integral(domain, a.z, dz, 1.0) * t).im;
            Point::new(z, a.w + (b.w - a.w) * t + Complex64::new(lift_re, lift_im))
        }
    }
}

/// Velocity `d/dt` at parameter `t ∈ [0, 1]` of the segment `a → b`.
pub(crate) fn segment_velocity(domain: &ModelDomain, a: &Point, b: &Point, t: f64, interpolation: Interpolation) -> Tangent {
    match interpolation {
        Interpolation::Straight => a.delta(b),
        Interpolation::Lifted => {
            let dz = b.z - a.z;
            let c = lifted_constant(domain, a, b);
            Tangent::new(dz, c - domain.dp_at(a.z + dz * t) * dz * 2.0)
        }
    }
}

/// `∫_0^t ∂P/∂z(z_a + s Δz) Δz ds`. The integrand is a polynomial of degree
/// below `deg P` in `s`, integrated exactly with enough eight-node panels.
fn lift_integral(domain: &ModelDomain, za: Complex64, dz: Complex64, t: f64) -> Complex64 {
    if dz == Complex64::new(0.0, 0.0) || t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let panels = (domain.degree() as usize).saturating_sub(1) / 15 + 1;
    let h = t / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let s0 = h * k as f64;
        for (&x, &wt) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            sum += domain.dp_at(za + dz * (s0 + h * x)) * wt;
        }
    }
    sum * dz * h
}

/// `c = w' + 2 ∂P/∂z z'` along the lifted segment `a → b`; its real part is
/// `r_P(b) - r_P(a)`.
fn lifted_constant(domain: &ModelDomain, a: &Point, b: &Point) -> Complex64 {
    let re = domain.defining_value(b) - domain.defining_value(a);
    let im = (b.w - a.w).im + 2.0 * lift_integral(domain, a.z, b.z - a.z, 1.0).im;
    Complex64::new(re, im)
}

/// `∫_0^1 dt / (x + t (y - x))` for `x, y > 0`.
fn inverse_log_mean(x: f64, y: f64) -> f64 {
    let u = (x - y) / (x + y);
    let ratio = if u.abs() < 1e-4 { 1.0 + u * u / 3.0 + u.powi(4) / 5.0 } else { u.atanh() / u };
    2.0 * ratio / (x + y)
}

/// Longest `z` displacement integrated by one panel of a lifted segment.
const PANEL_SPAN: f64 = 0.5;

/// Finsler length of the lifted segment `a → b`. Fails only if an end point
/// is not interior, since `r_P` is linear along the segment.
pub(crate) fn lifted_length(domain: &ModelDomain, a: &Point, b: &Point) -> Result<f64, SegmentFault> {
    smoothed_lifted_length(domain, a, b, 0.0)
}

/// Lifted length with the two norms `|c|` and `|Δz|` replaced by
/// `√(|·|² + s²)`, the scales `s` chosen so that each adds at most `mu` to
/// the length. With `mu = 0` this is the exact length.
pub(crate) fn smoothed_lifted_length(
    domain: &ModelDomain,
    a: &Point,
    b: &Point,
    mu: f64,
) -> Result<f64, SegmentFault> {
    let (da, db) = (depth_at(domain, a)?, depth_at(domain, b)?);
    let ilm = inverse_log_mean(da, db);
    let c = lifted_constant(domain, a, b).norm();
    let vertical = if mu > 0.0 { c.hypot(mu / ilm) * ilm } else { c * ilm };
    let dz = b.z - a.z;
    let span = dz.norm();
    if span == 0.0 && mu == 0.0 {
        return Ok(vertical);
    }
    let mut horizontal = 0.0;
    let mut stack = vec![(0.0, 1.0, 0u32)];
    while let Some((t0, t1, splits)) = stack.pop() {
        let (d0, d1) = (da + t0 * (db - da), da + t1 * (db - da));
        let coarse = d0.max(d1) > PANEL_RATIO * d0.min(d1) || span * (t1 - t0) > PANEL_SPAN;
        if coarse && splits < MAX_PANEL_SPLITS {
            let tm = 0.5 * (t0 + t1);
            stack.push((tm, t1, splits + 1));
            stack.push((t0, tm, splits + 1));
            continue;
        }
        let mut sum = 0.0;
        for (&x, &wt) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            let t = t0 + (t1 - t0) * x;
            sum += wt * domain.horizontal_at(a.z + dz * t, da + t * (db - da));
        }
        horizontal += (t1 - t0) * sum;
    }
    let factor = if mu > 0.0 && horizontal > 0.0 { span.hypot(mu / horizontal) } else { span };
    Ok(vertical + factor * horizontal)
}

/// Finsler length of the straight segment `a → b`.
///
/// The segment is split into panels, each integrated with the eight-node
/// rule, until `|r_P|` varies by at most [`PANEL_RATIO`] across the endpoints
/// and nodes of every panel; under that condition the rule is accurate to
/// roundoff.
pub(crate) fn straight_length(domain: &ModelDomain, a: &Point, b: &Point) -> Result<f64, SegmentFault> {
    let v = a.delta(b);
    let (da, db) = (depth_at(domain, a)?, depth_at(domain, b)?);
    let mut total = 0.0;
    // stack of (t0, t1, depth at t0, depth at t1, splits)
    let mut stack = vec![(0.0, 1.0, da, db, 0u32)];
    while let Some((t0, t1, d0, d1, splits)) = stack.pop() {
        let mut lo = d0.min(d1);
        let mut hi = d0.max(d1);
        let mut sum = 0.0;
        for (&t, &wt) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            let frame = domain.frame(&a.lerp(b, t0 + (t1 - t0) * t)).map_err(|e| match e {
                crate::Error::BoundaryPoint { r } => SegmentFault { r },
                _ => SegmentFault { r: f64::NAN },
            })?;
            lo = lo.min(frame.depth);
            hi = hi.max(frame.depth);
            sum += wt * frame.eval(&v);
        }
        if hi > PANEL_RATIO * lo && splits < MAX_PANEL_SPLITS {
            let tm = 0.5 * (t0 + t1);
            let dm = depth_at(domain, &a.lerp(b, tm))?;
            stack.push((tm, t1, dm, d1, splits + 1));
            stack.push((t0, tm, d0, dm, splits + 1));
        } else {
            total += (t1 - t0) * sum;
        }
    }
    Ok(total)
}
