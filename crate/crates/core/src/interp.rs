//! Weight arithmetic for interpolating between the dyadic weights
//! `A = 2^n - 2` and `B = 2^{n+1} - 2`.
//!
//! For `alpha = A (1 - theta) + B theta` the interpolated measure
//! `dw = Gamma(1+A)^{1-theta} Gamma(1+B)^theta / (2^alpha t^{1+alpha}) dt`
//! has the same power of `t` as `d mu_alpha`, so the two differ by a constant.

use crate::error::{BergError, Result};
use crate::kernels::Weight;
use crate::laplace::{mu_alpha_const, power_weighted_integral, HalfLineFunction};
use crate::numeric::gamma;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationData {
    pub alpha: f64,
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    /// `Gamma(1+A)^{1-theta} Gamma(1+B)^theta / 2^alpha`; absent at the Hardy endpoint.
    pub weight_const_dw: Option<f64>,
    /// `Gamma(1+alpha) / 2^alpha`
    pub weight_const_mu: f64,
    /// `weight_const_dw / weight_const_mu`
    pub ratio: Option<f64>,
    /// `alpha = 2^n - 2` exactly.
    pub dyadic: bool,
    /// `alpha` in `(-1, 0)`: the lower endpoint is `A = -1`, outside the Gamma domain.
    pub hardy_endpoint: bool,
}

impl InterpolationData {
    /// `A (1 - theta) + B theta`
    pub fn interpolated_alpha(&self) -> f64 {
        self.a * (1.0 - self.theta) + self.b * self.theta
    }

    /// `(dw density) / (d mu_alpha density)` at `t`, each with its own power of `t`.
    pub fn density_ratio_at(&self, t: f64) -> Option<f64> {
        let dw = self.weight_const_dw? * t.powf(-(self.interpolated_alpha() + 1.0));
        let mu = self.weight_const_mu * t.powf(-(self.alpha + 1.0));
        Some(dw / mu)
    }
}

/// Brackets `alpha` between consecutive dyadic weights and computes the
/// interpolation parameter and measure constants.
pub fn interp_params(alpha: f64) -> Result<InterpolationData> {
    let w = Weight::new(alpha)?;
    let (n, a, b) = if alpha < 0.0 {
        (0, -1.0, 0.0)
    } else {
        let mut n = 1u32;
        while alpha >= 2f64.powi(n as i32 + 1) - 2.0 {
            n += 1;
        }
        (n, 2f64.powi(n as i32) - 2.0, 2f64.powi(n as i32 + 1) - 2.0)
    };
    let theta = (alpha - a) / (b - a);
    let hardy_endpoint = alpha < 0.0;
    let weight_const_mu = mu_alpha_const(&w);
    let weight_const_dw =
        (!hardy_endpoint).then(|| gamma(1.0 + a).powf(1.0 - theta) * gamma(1.0 + b).powf(theta) / 2f64.powf(alpha));
    Ok(InterpolationData {
        alpha,
        n,
        a,
        b,
        theta,
        weight_const_dw,
        weight_const_mu,
        ratio: weight_const_dw.map(|d| d / weight_const_mu),
        dyadic: alpha == a,
        hardy_endpoint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentResidual {
    /// `lambda^{(2+A)(1-theta)/2} lambda^{(2+B) theta/2}`
    pub lhs: f64,
    /// `lambda^{(2+alpha)/2}`
    pub rhs: f64,
    pub abs: f64,
    pub rel: f64,
}

pub fn exponent_identity_check(data: &InterpolationData, lambda: f64) -> Result<ExponentResidual> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BergError::NotPositive("lambda", lambda));
    }
    let lhs = lambda.powf((2.0 + data.a) * (1.0 - data.theta) / 2.0) * lambda.powf((2.0 + data.b) * data.theta / 2.0);
    let rhs = lambda.powf((2.0 + data.alpha) / 2.0);
    let abs = (lhs - rhs).abs();
    Ok(ExponentResidual {
        lhs,
        rhs,
        abs,
        rel: abs / rhs,
    })
}

/// Relative gap between `||f||_{L^2(dw)} (mu/dw)^{1/2}` and `||f||_{L^2(d mu_alpha)}`,
/// both norms in closed form.
pub fn norm_rescaling_check(data: &InterpolationData, f: &HalfLineFunction) -> Result<f64> {
    let dw_const = data.weight_const_dw.ok_or(BergError::InvalidWeight(data.alpha))?;
    let norm_dw = (dw_const * power_weighted_integral(f, data.interpolated_alpha())?).sqrt();
    let norm_mu = (data.weight_const_mu * power_weighted_integral(f, data.alpha)?).sqrt();
    let rescaled = norm_dw * (data.weight_const_mu / dw_const).sqrt();
    Ok(if norm_mu == 0.0 {
        rescaled.abs()
    } else {
        (rescaled - norm_mu).abs() / norm_mu
    })
}
