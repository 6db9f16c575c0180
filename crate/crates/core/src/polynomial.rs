//! Polynomials in `z` and `z̄` with exact Wirtinger calculus.
//!
//! A [`WirtingerPolynomial`] stores `Σ a_{jk} z^j z̄^k` as a sparse map from
//! bidegree to complex coefficient. Real-valued polynomials are exactly the
//! Hermitian-symmetric ones (`a_{jk} = conj(a_{kj})`); derivatives of such
//! polynomials are in general complex-valued, so symmetry is checked where it
//! matters (JSON input, model domains) rather than enforced on every value.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `|a_{jk} - conj(a_{kj})|` accepted from external input.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct WirtingerPolynomial {
    terms: BTreeMap<(u32, u32), Complex64>,
}

/// Cached powers `z^p` and `z̄^p` for repeated evaluation at one point.
#[derive(Debug, Clone)]
pub struct Powers {
    z: Vec<Complex64>,
    zb: Vec<Complex64>,
}

impl Powers {
    pub fn new(z: Complex64, max_degree: u32) -> Self {
        let n = max_degree as usize + 1;
        let mut zp = Vec::with_capacity(n);
        let mut zbp = Vec::with_capacity(n);
        let zb = z.conj();
        let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for _ in 0..n {
            zp.push(a);
            zbp.push(b);
            a *= z;
            b *= zb;
        }
        Self { z: zp, zb: zbp }
    }

    #[inline]
    pub(crate) fn term(&self, j: usize, k: usize) -> Complex64 {
        self.z[j] * self.zb[k]
    }

    pub fn max_degree(&self) -> u32 {
        (self.z.len() - 1) as u32
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i)).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

impl WirtingerPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · z^j z̄^k`.
    pub fn monomial(j: u32, k: u32, c: Complex64) -> Self {
        Self::from_terms([((j, k), c)])
    }

    /// Sums the given terms; coefficients that end up exactly zero are dropped.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (key, c) in terms {
            *map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self { terms: map }
    }

    /// Builds a real-valued polynomial, rejecting coefficient sets that are
    /// not Hermitian-symmetric within [`HERMITIAN_TOL`]. Accepted input is
    /// symmetrized so the stored coefficients pair up exactly.
    pub fn hermitian<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((u32, u32), Complex64)>,
    {
        let p = Self::from_terms(terms);
        p.check_hermitian(HERMITIAN_TOL)?;
        Ok(p.hermitize())
    }

    /// Thullen polynomial `|z|^{2p}`.
    pub fn thullen(p: u32) -> Self {
        Self::monomial(p, p, Complex64::new(1.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `j + k` over stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(j, k)| j + k).max().unwrap_or(0)
    }

    pub fn coefficient(&self, j: u32, k: u32) -> Complex64 {
        self.terms.get(&(j, k)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&key, &c)| (key, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(0, 0)
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        for (&(j, k), &c) in &self.terms {
            let partner = self.coefficient(k, j);
            if (c - partner.conj()).norm() > tol {
                return Err(Error::NonHermitian { j, k });
            }
        }
        Ok(())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.check_hermitian(tol).is_ok()
    }

    /// Replaces each pair `(a_{jk}, a_{kj})` by its Hermitian average.
    pub(crate) fn hermitize(&self) -> Self {
        let mut out = BTreeMap::new();
        for (&(j, k), &c) in &self.terms {
            let sym = if j == k {
                Complex64::new(c.re, 0.0)
            } else {
                (c + self.coefficient(k, j).conj()) * 0.5
            };
            if sym != Complex64::new(0.0, 0.0) {
                out.insert((j, k), sym);
                out.insert((k, j), sym.conj());
            }
        }
        Self { terms: out }
    }

    pub fn evaluate_with(&self, pw: &Powers) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(j, k), &c)| c * pw.term(j as usize, k as usize))
            .sum()
    }

    pub fn evaluate_complex(&self, z: Complex64) -> Complex64 {
        self.evaluate_with(&Powers::new(z, self.degree()))
    }

    /// Value of a real-valued polynomial at `z`.
    pub fn evaluate(&self, z: Complex64) -> f64 {
        let pw = Powers::new(z, self.degree());
        let v = self.evaluate_with(&pw);
        debug_assert!(
            v.im.abs() <= 1e-12 * self.magnitude_with(&pw) + f64::MIN_POSITIVE,
            "imaginary residue {} for a polynomial expected to be real",
            v.im
        );
        v.re
    }

    /// `Σ |a_{jk}| |z|^{j+k}`, the natural scale of roundoff in an evaluation.
    fn magnitude_with(&self, pw: &Powers) -> f64 {
        self.terms
            .iter()
            .map(|(&(j, k), c)| c.norm() * pw.term(j as usize, k as usize).norm())
            .sum()
    }

    /// `∂^{j+k} P / ∂z^j ∂z̄^k`, exact on coefficients.
    pub fn wirtinger_derivative(&self, j: u32, k: u32) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(&(a, b), &c)| {
            (a >= j && b >= k).then(|| ((a - j, b - k), c * falling(a, j) * falling(b, k)))
        }))
    }

    /// Maximum modulus of the mixed derivatives of total order `l` at `z`.
    pub fn a_l_profile(&self, z: Complex64, l: u32) -> f64 {
        if l < 2 || l > self.degree() {
            return 0.0;
        }
        let pw = Powers::new(z, self.degree());
        (1..l)
            .map(|j| self.wirtinger_derivative(j, l - j).evaluate_with(&pw).norm())
            .fold(0.0, f64::max)
    }

    /// Nonconstant terms with `j = 0` or `k = 0`.
    pub fn harmonic_part(&self) -> Self {
        self.filtered(|j, k| (j == 0) != (k == 0))
    }

    /// Terms with `j, k > 0`.
    pub fn mixed_part(&self) -> Self {
        self.filtered(|j, k| j > 0 && k > 0)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        self.filtered(|j, k| j + k == d)
    }

    fn filtered(&self, keep: impl Fn(u32, u32) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(&(j, k), _)| keep(j, k))
                .map(|(&key, &c)| (key, c))
                .collect(),
        }
    }

    /// `z ↦ P(ζ + z)`, expanded binomially.
    pub fn recenter(&self, zeta: Complex64) -> Self {
        if zeta == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        let pw = Powers::new(zeta, self.degree());
        let mut acc = BTreeMap::new();
        for (&(j, k), &c) in &self.terms {
            for p in 0..=j {
                let zp = c * binomial(j, p) * pw.z[(j - p) as usize];
                for q in 0..=k {
                    let v = zp * binomial(k, q) * pw.zb[(k - q) as usize];
                    *acc.entry((p, q)).or_insert(Complex64::new(0.0, 0.0)) += v;
                }
            }
        }
        let out = Self::from_terms(acc);
        if self.is_hermitian(HERMITIAN_TOL) {
            out.hermitize()
        } else {
            out
        }
    }

    /// `z ↦ P(τ z)` for real `τ`: coefficient `(j, k)` times `τ^{j+k}`.
    pub fn dilate(&self, tau: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&(j, k), &c)| ((j, k), c * tau.powi((j + k) as i32))),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(&key, &c)| (key, c * s)))
    }

    /// Max coefficient modulus; a norm on polynomials of bounded degree.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `4 Re ∂²P/∂z∂z̄` at `z`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        4.0 * self.wirtinger_derivative(1, 1).evaluate_complex(z).re
    }

    /// Minimum Laplacian over `grid` together with the grid point attaining it.
    /// Returns `None` for an empty grid.
    pub fn subharmonicity_witness(&self, grid: &[Complex64]) -> Option<(Complex64, f64)> {
        let lap = self.wirtinger_derivative(1, 1);
        grid.iter()
            .map(|&z| (z, 4.0 * lap.evaluate_complex(z).re))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Minimum Laplacian over `grid`; negative values certify a violation.
    pub fn subharmonicity_margin(&self, grid: &[Complex64]) -> f64 {
        self.subharmonicity_witness(grid)
            .map_or(f64::INFINITY, |(_, m)| m)
    }
}

impl Add for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;

    fn add(self, rhs: Self) -> WirtingerPolynomial {
        WirtingerPolynomial::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;

    fn sub(self, rhs: Self) -> WirtingerPolynomial {
        WirtingerPolynomial::from_terms(self.terms().chain(rhs.terms().map(|(key, c)| (key, -c))))
    }
}

impl Neg for &WirtingerPolynomial {
    type Output = WirtingerPolynomial;

    fn neg(self) -> WirtingerPolynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for WirtingerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(j, k), c)| {
                let coeff = if c.im == 0.0 {
                    format!("{}", c.re)
                } else {
                    format!("({}{:+}i)", c.re, c.im)
                };
                let mut s = coeff;
                if j > 0 {
                    s.push_str(&format!(" z^{j}"));
                }
                if k > 0 {
                    s.push_str(&format!(" zb^{k}"));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// One term of the JSON polynomial format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub j: u32,
    pub k: u32,
    pub re: f64,
    pub im: f64,
}

/// `{"terms": [{"j": 1, "k": 1, "re": 1.0, "im": 0.0}, ...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub terms: Vec<TermJson>,
}

impl TryFrom<PolynomialJson> for WirtingerPolynomial {
    type Error = Error;

    fn try_from(value: PolynomialJson) -> Result<Self> {
        for t in &value.terms {
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::MalformedPolynomial(format!(
                    "non-finite coefficient at ({}, {})",
                    t.j, t.k
                )));
            }
        }
        Self::hermitian(
            value
                .terms
                .into_iter()
                .map(|t| ((t.j, t.k), Complex64::new(t.re, t.im))),
        )
    }
}

impl From<WirtingerPolynomial> for PolynomialJson {
    fn from(p: WirtingerPolynomial) -> Self {
        Self {
            terms: p
                .terms()
                .map(|((j, k), c)| TermJson { j, k, re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl WirtingerPolynomial {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PolynomialJson =
            serde_json::from_str(s).map_err(|e| Error::MalformedPolynomial(e.to_string()))?;
        Self::try_from(raw)
    }
}
