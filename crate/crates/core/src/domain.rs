//! Model domains `Ω_P = {Re w + P(z) < 0}` and their Catlin metric.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{Powers, WirtingerPolynomial, HERMITIAN_TOL};

/// Points with `r_P ≥ -INTERIOR_TOL` are treated as boundary points by the metric.
pub const INTERIOR_TOL: f64 = 1e-14;

/// Modulus below which a mixed derivative counts as vanishing in type detection.
pub const TYPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Complex64,
    pub w: Complex64,
}

impl Point {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    /// `(z_re + i z_im, w_re + i w_im)`.
    pub fn from_reals(z_re: f64, z_im: f64, w_re: f64, w_im: f64) -> Self {
        Self::new(Complex64::new(z_re, z_im), Complex64::new(w_re, w_im))
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(self.z + (other.z - self.z) * t, self.w + (other.w - self.w) * t)
    }

    pub fn delta(&self, other: &Point) -> Tangent {
        Tangent::new(other.z - self.z, other.w - self.w)
    }

    pub fn offset(&self, v: &Tangent, s: f64) -> Point {
        Point::new(self.z + v.x * s, self.w + v.y * s)
    }
}

/// Tangent vector `x ∂/∂z + y ∂/∂w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    pub x: Complex64,
    pub y: Complex64,
}

impl Tangent {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self::new(self.x * lambda, self.y * lambda)
    }

    pub fn is_zero(&self) -> bool {
        self.x == Complex64::new(0.0, 0.0) && self.y == Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTangent {
    pub point: Point,
    pub tangent: Tangent,
}

/// D'Angelo type of a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DangeloType {
    Finite(u32),
    Infinite,
}

/// Everything the metric needs at one base point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MetricFrame {
    /// `|r_P|` at the base point.
    pub depth: f64,
    /// `∂P/∂z` at the base point.
    pub dp: Complex64,
    /// `Σ_l (A_l / |r_P|)^{1/l}`.
    pub horizontal: f64,
}

impl MetricFrame {
    #[inline]
    pub fn eval(&self, v: &Tangent) -> f64 {
        (v.y + v.x * self.dp * 2.0).norm() / self.depth + v.x.norm() * self.horizontal
    }
}

/// The model domain of a subharmonic, harmonic-free polynomial with `P(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDomainJson", into = "ModelDomainJson")]
pub struct ModelDomain {
    poly: WirtingerPolynomial,
    degree: u32,
    compiled: Compiled,
}

type Terms = Vec<(usize, usize, Complex64)>;

/// Flattened term lists for the hot metric evaluation path.
#[derive(Debug, Clone, Default, PartialEq)]
struct Compiled {
    value: Terms,
    dz: Terms,
    /// `mixed[i]` holds the mixed derivatives of order `l = i + 2`.
    mixed: Vec<Vec<Terms>>,
}

fn flatten(p: &WirtingerPolynomial) -> Terms {
    p.terms().map(|((j, k), c)| (j as usize, k as usize, c)).collect()
}

#[inline]
fn eval_terms(terms: &Terms, pw: &Powers) -> Complex64 {
    terms.iter().map(|&(j, k, c)| c * pw.term(j, k)).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDomainJson {
    pub polynomial: WirtingerPolynomial,
}

impl TryFrom<ModelDomainJson> for ModelDomain {
    type Error = Error;

    fn try_from(value: ModelDomainJson) -> Result<Self> {
        ModelDomain::new(value.polynomial)
    }
}

impl From<ModelDomain> for ModelDomainJson {
    fn from(d: ModelDomain) -> Self {
        Self { polynomial: d.poly }
    }
}

/// 41×41 grid over `[-2, 2]²` used for the construction-time subharmonicity check.
pub fn default_grid() -> Vec<Complex64> {
    let n = 41;
    let step = 4.0 / (n - 1) as f64;
    (0..n)
        .flat_map(|a| (0..n).map(move |b| Complex64::new(-2.0 + a as f64 * step, -2.0 + b as f64 * step)))
        .collect()
}

impl ModelDomain {
    pub fn new(poly: WirtingerPolynomial) -> Result<Self> {
        poly.check_hermitian(HERMITIAN_TOL)?;
        let poly = poly.hermitize();
        if let Some(((j, k), _)) = poly.harmonic_part().terms().next() {
            return Err(Error::HarmonicTerm { j, k });
        }
        let c0 = poly.constant_term();
        if c0.re != 0.0 {
            return Err(Error::NonzeroConstant(c0.re));
        }
        // roundoff allowance scaled to the size of the Laplacian's terms on the grid
        let lap_scale: f64 = poly
            .terms()
            .map(|((j, k), c)| 4.0 * c.norm() * f64::from(j * k) * 2f64.powi((j + k) as i32))
            .sum();
        if let Some((z, laplacian)) = poly.subharmonicity_witness(&default_grid()) {
            if laplacian < -1e-12 * (1.0 + lap_scale) {
                return Err(Error::NotSubharmonic { z, laplacian });
            }
        }
        Ok(Self::assemble(poly))
    }

    fn assemble(poly: WirtingerPolynomial) -> Self {
        let degree = poly.degree();
        let compiled = Compiled {
            value: flatten(&poly),
            dz: flatten(&poly.wirtinger_derivative(1, 0)),
            mixed: (2..=degree)
                .map(|l| (1..l).map(|j| flatten(&poly.wirtinger_derivative(j, l - j))).collect())
                .collect(),
        };
        Self { poly, degree, compiled }
    }

    /// The Thullen domain `{Re w + |z|^{2p} < 0}`.
    pub fn thullen(p: u32) -> Self {
        Self::assemble(WirtingerPolynomial::thullen(p))
    }

    pub fn polynomial(&self) -> &WirtingerPolynomial {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.poly.homogeneous_part(self.degree) == self.poly
    }

    /// `r_P(z, w) = Re w + P(z)`.
    pub fn defining_value(&self, p: &Point) -> f64 {
        p.w.re + self.poly.evaluate(p.z)
    }

    /// Boundary point over `z` with the given `Im w`.
    pub fn boundary_point(&self, z: Complex64, im_w: f64) -> Point {
        Point::new(z, Complex64::new(-self.poly.evaluate(z), im_w))
    }

    /// `|r_P(p)|` for interior points.
    pub fn depth(&self, p: &Point) -> Result<f64> {
        let r = self.defining_value(p);
        if r >= -INTERIOR_TOL || r.is_nan() {
            Err(Error::BoundaryPoint { r })
        } else {
            Ok(-r)
        }
    }

    pub(crate) fn frame(&self, p: &Point) -> Result<MetricFrame> {
        let pw = Powers::new(p.z, self.degree);
        let r = p.w.re + eval_terms(&self.compiled.value, &pw).re;
        if r >= -INTERIOR_TOL || r.is_nan() {
            return Err(Error::BoundaryPoint { r });
        }
        let depth = -r;
        let dp = eval_terms(&self.compiled.dz, &pw);
        let mut horizontal = 0.0;
        for (i, derivs) in self.compiled.mixed.iter().enumerate() {
            let l = (i + 2) as f64;
            let a = derivs
                .iter()
                .map(|d| eval_terms(d, &pw).norm())
                .fold(0.0, f64::max);
            if a > 0.0 {
                horizontal += (a / depth).powf(1.0 / l);
            }
        }
        Ok(MetricFrame { depth, dp, horizontal })
    }

    /// `∂P/∂z` at `z`.
    pub(crate) fn dp_at(&self, z: Complex64) -> Complex64 {
        eval_terms(&self.compiled.dz, &Powers::new(z, self.degree))
    }

    /// `Σ_l (A_l(z) / depth)^{1/l}`.
    pub(crate) fn horizontal_at(&self, z: Complex64, depth: f64) -> f64 {
        let pw = Powers::new(z, self.degree);
        let mut horizontal = 0.0;
        for (i, derivs) in self.compiled.mixed.iter().enumerate() {
            let l = (i + 2) as f64;
            let a = derivs.iter().map(|d| eval_terms(d, &pw).norm()).fold(0.0, f64::max);
            if a > 0.0 {
                horizontal += (a / depth).powf(1.0 / l);
            }
        }
        horizontal
    }

    /// Catlin metric `M_{r_P}(p, v)`.
    pub fn catlin_metric(&self, p: &Point, v: &Tangent) -> Result<f64> {
        Ok(self.frame(p)?.eval(v))
    }

    pub fn metric(&self, pt: &PointTangent) -> Result<f64> {
        self.catlin_metric(&pt.point, &pt.tangent)
    }

    /// `A_l^P(z)`.
    pub fn a_l(&self, z: Complex64, l: u32) -> f64 {
        if l < 2 || l > self.degree {
            return 0.0;
        }
        let pw = Powers::new(z, self.degree);
        self.compiled.mixed[(l - 2) as usize]
            .iter()
            .map(|d| eval_terms(d, &pw).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest `l ≥ 2` with `A_l^P(z0) > 0`.
    pub fn dangelo_type(&self, z0: Complex64) -> DangeloType {
        (2..=self.degree)
            .find(|&l| self.a_l(z0, l) > TYPE_TOL)
            .map_or(DangeloType::Infinite, DangeloType::Finite)
    }

    /// `Φ_λ(z, w) = (λz, λ^m w)`, an automorphism when `P` is homogeneous.
    pub fn dilation(&self, lambda: f64, p: &Point) -> Result<Point> {
        self.check_dilation(lambda)?;
        Ok(Point::new(p.z * lambda, p.w * lambda.powi(self.degree as i32)))
    }

    /// `dΦ_λ(x, y) = (λx, λ^m y)`.
    pub fn dilation_differential(&self, lambda: f64, v: &Tangent) -> Result<Tangent> {
        self.check_dilation(lambda)?;
        Ok(Tangent::new(v.x * lambda, v.y * lambda.powi(self.degree as i32)))
    }

    fn check_dilation(&self, lambda: f64) -> Result<()> {
        if !self.is_homogeneous() {
            return Err(Error::NotHomogeneous { degree: self.degree });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation factor {lambda} must be > 0")));
        }
        Ok(())
    }
}
