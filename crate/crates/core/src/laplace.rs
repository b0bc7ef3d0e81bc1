//! Laplace transforms of finite sums `sum c t^beta e^{-s t}` and their norms in
//! `L^2(R_+, d mu_alpha)`, `d mu_alpha = Gamma(1 + alpha) / (2^alpha t^{alpha + 1}) dt`.
//!
//! Every quantity here has a Gamma-function closed form, which makes these
//! functions exact oracles for the Bergman-side quadrature.

use crate::error::{BergError, Result};
use crate::kernels::Weight;
use crate::numeric::{cpow, gamma};
use crate::space::{inner_product, KernelCombination, QuadratureScheme};
use crate::symbols::HalfPlanePoint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `c t^beta e^{-s t}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: Complex64,
    pub beta: f64,
    pub s: Complex64,
}

impl Monomial {
    pub fn new(c: Complex64, beta: f64, s: Complex64) -> Self {
        Self { c, beta, s }
    }

    pub fn real(c: f64, beta: f64, s: f64) -> Self {
        Self::new(c.into(), beta, s.into())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.c * t.powf(self.beta) * (-self.s * t).exp()
    }
}

/// Finite sum of monomials on the half-line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfLineFunction {
    pub terms: Vec<Monomial>,
}

impl HalfLineFunction {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        for m in &terms {
            if !(m.s.re > 0.0) {
                return Err(BergError::NotPositive("Re s", m.s.re));
            }
        }
        Ok(Self { terms })
    }

    pub fn monomial(c: f64, beta: f64, s: f64) -> Result<Self> {
        Self::new(vec![Monomial::real(c, beta, s)])
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|m| m.eval(t)).sum()
    }

    pub fn plus(mut self, other: &HalfLineFunction) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self
    }

    /// The transform as a kernel combination when every term has
    /// `beta = 1 + alpha`: `t^{1+alpha} e^{-s t}` transforms to
    /// `Gamma(2 + alpha) / (2^alpha (1 + alpha)) k_{conj s}`.
    pub fn as_kernel_combination(&self, w: &Weight) -> Option<KernelCombination> {
        let beta = 1.0 + w.alpha();
        if self
            .terms
            .iter()
            .any(|m| (m.beta - beta).abs() > 1e-15 * beta.abs().max(1.0))
        {
            return None;
        }
        let scale = gamma(2.0 + w.alpha()) / w.norm_const();
        let terms = self
            .terms
            .iter()
            .map(|m| Ok((m.c * scale, HalfPlanePoint::try_from(m.s.conj())?)))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        Some(KernelCombination::new(*w, terms))
    }
}

/// `(L f)(z) = int_0^inf f(t) e^{-t z} dt = sum c Gamma(1 + beta) / (s + z)^{1 + beta}`.
pub fn laplace_eval(f: &HalfLineFunction, z: HalfPlanePoint) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for m in &f.terms {
        if !(m.beta > -1.0) {
            return Err(BergError::TransformDiverges(m.beta));
        }
        acc += m.c * gamma(1.0 + m.beta) / cpow(m.s + z.z(), 1.0 + m.beta);
    }
    Ok(acc)
}

/// `int_0^inf |f(t)|^2 t^{-e-1} dt` in closed form; needs `beta > e/2` for every term.
pub fn power_weighted_integral(f: &HalfLineFunction, e: f64) -> Result<f64> {
    for m in &f.terms {
        if !(m.beta > e / 2.0) {
            return Err(BergError::NotIntegrable {
                beta: m.beta,
                bound: e / 2.0,
            });
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &f.terms {
        for b in &f.terms {
            let k = a.beta + b.beta - e;
            acc += a.c * b.c.conj() * gamma(k) / cpow(a.s + b.s.conj(), k);
        }
    }
    Ok(acc.re)
}

/// Density constant `Gamma(1 + alpha) / 2^alpha` of `d mu_alpha`.
pub fn mu_alpha_const(w: &Weight) -> f64 {
    gamma(1.0 + w.alpha()) / 2f64.powf(w.alpha())
}

/// `||f||^2` in `L^2(d mu_alpha)`.
pub fn mu_alpha_norm_sq(w: &Weight, f: &HalfLineFunction) -> Result<f64> {
    Ok(mu_alpha_const(w) * power_weighted_integral(f, w.alpha())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// `||L f||^2` on `A^2_alpha` by quadrature.
    pub lhs_quadrature: f64,
    pub lhs_quadrature_error: f64,
    /// `||L f||^2` from the kernel formula when `L f` is a kernel combination.
    pub lhs_closed: Option<f64>,
    /// `||f||^2` in `L^2(d mu_alpha)`.
    pub rhs: f64,
    pub gap_quadrature: f64,
    pub gap_closed: Option<f64>,
}

/// Compares `||L f||_{A^2_alpha}^2` with `||f||_{L^2(d mu_alpha)}^2`.
pub fn isometry_check(w: &Weight, f: &HalfLineFunction, q: &QuadratureScheme) -> Result<IsometryReport> {
    let rhs = mu_alpha_norm_sq(w, f)?;
    let transform = |z: Complex64| -> Complex64 {
        f.terms
            .iter()
            .map(|m| m.c * gamma(1.0 + m.beta) / cpow(m.s + z, 1.0 + m.beta))
            .sum()
    };
    let ip = inner_product(w, transform, transform, q)?;
    let lhs_quadrature = ip.value.re;
    let lhs_closed = f.as_kernel_combination(w).map(|k| k.norm_sq());
    let gap = |lhs: f64| if rhs == 0.0 { lhs.abs() } else { (lhs - rhs).abs() / rhs };
    Ok(IsometryReport {
        lhs_quadrature,
        lhs_quadrature_error: ip.error_estimate,
        lhs_closed,
        rhs,
        gap_quadrature: gap(lhs_quadrature),
        gap_closed: lhs_closed.map(gap),
    })
}
