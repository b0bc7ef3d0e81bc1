//! Inner products of the weighted Bergman space by tensor Gauss-Legendre
//! quadrature over the half-plane,
//! `<f, g> = (1/pi) int_R int_0^inf x^alpha f(x + iy) conj g(x + iy) dx dy`.

use crate::error::{BergError, Result};
use crate::kernels::{bergman_kernel, Weight};
use crate::numeric::gauss_legendre_on;
use crate::symbols::HalfPlanePoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadrature parameters. `x = u / (1 - u)` maps Gauss-Legendre nodes on
/// `(0, 1)` to the half-line. `[-y_max, y_max]` is covered by panels graded
/// towards the real axis; `|y| > y_max` is one more panel under `y = y_max / v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub n_x: usize,
    pub n_y: usize,
    pub y_max: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            n_x: 160,
            n_y: 400,
            y_max: 200.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    params: SchemeParams,
    x_nodes: Vec<f64>,
    x_weights: Vec<f64>,
    y_nodes: Vec<f64>,
    y_weights: Vec<f64>,
}

// Positive panel breakpoints; mirrored for negative y.
const Y_BREAKS: [f64; 11] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

impl QuadratureScheme {
    pub fn new(params: SchemeParams) -> Result<Self> {
        if params.n_x == 0 || params.n_y == 0 || !(params.y_max > 0.0) {
            return Err(BergError::InvalidGrid(format!("bad quadrature parameters {params:?}")));
        }
        let (u, wu) = gauss_legendre_on(params.n_x, 0.0, 1.0);
        let x_nodes: Vec<f64> = u.iter().map(|u| u / (1.0 - u)).collect();
        let x_weights: Vec<f64> = u.iter().zip(&wu).map(|(u, w)| w / ((1.0 - u) * (1.0 - u))).collect();

        let mut breaks: Vec<f64> = Y_BREAKS.iter().copied().filter(|b| *b < params.y_max).collect();
        breaks.push(params.y_max);
        let panels = breaks.len() - 1;
        let per_panel = (params.n_y / (2 * panels)).max(2);
        let mut y_nodes = Vec::with_capacity(2 * (panels + 1) * per_panel);
        let mut y_weights = Vec::with_capacity(2 * (panels + 1) * per_panel);
        let mut push = |y: f64, wy: f64| {
            y_nodes.push(y);
            y_weights.push(wy);
            y_nodes.push(-y);
            y_weights.push(wy);
        };
        for w in breaks.windows(2) {
            let (y, wy) = gauss_legendre_on(per_panel, w[0], w[1]);
            y.into_iter().zip(wy).for_each(|(y, wy)| push(y, wy));
        }
        let (v, wv) = gauss_legendre_on(per_panel, 0.0, 1.0);
        for (v, wv) in v.into_iter().zip(wv) {
            push(params.y_max / v, wv * params.y_max / (v * v));
        }
        Ok(Self {
            params,
            x_nodes,
            x_weights,
            y_nodes,
            y_weights,
        })
    }

    pub fn params(&self) -> SchemeParams {
        self.params
    }

    /// Same layout with twice the nodes in each direction.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(SchemeParams {
            n_x: 2 * self.params.n_x,
            n_y: 2 * self.params.n_y,
            y_max: self.params.y_max,
        })
    }

    pub fn node_count(&self) -> usize {
        self.x_nodes.len() * self.y_nodes.len()
    }

    /// Raw quadrature sum without the doubled-scheme error estimate.
    pub fn integrate<F, G>(&self, w: &Weight, f: F, g: G) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Complex64 + Sync,
        G: Fn(Complex64) -> Complex64 + Sync,
    {
        let alpha = w.alpha();
        let rows: Vec<Result<Complex64>> = self
            .x_nodes
            .par_iter()
            .zip(self.x_weights.par_iter())
            .map(|(&x, &wx)| {
                let xa = x.powf(alpha);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&y, &wy) in self.y_nodes.iter().zip(&self.y_weights) {
                    let z = Complex64::new(x, y);
                    let v = f(z) * g(z).conj();
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(BergError::NonFinite(z));
                    }
                    acc += v * wy;
                }
                Ok(acc * (wx * xa))
            })
            .collect();
        // sequential reduction keeps the result independent of thread count
        let mut total = Complex64::new(0.0, 0.0);
        for r in rows {
            total += r?;
        }
        Ok(total / PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProduct {
    pub value: Complex64,
    /// `|value - value on the doubled scheme|`.
    pub error_estimate: f64,
}

/// Quadrature approximation of `<f, g>` on `A^2_alpha`, with an error
/// estimate from the doubled-node scheme. The integrand must decay; finite
/// kernel combinations always qualify.
pub fn inner_product<F, G>(w: &Weight, f: F, g: G, q: &QuadratureScheme) -> Result<InnerProduct>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    G: Fn(Complex64) -> Complex64 + Sync,
{
    let value = q.integrate(w, &f, &g)?;
    let fine = q.doubled()?.integrate(w, &f, &g)?;
    Ok(InnerProduct {
        value,
        error_estimate: (fine - value).norm(),
    })
}

/// `f = sum_i c_i k_{z_i}` for a fixed weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCombination {
    pub weight: Weight,
    pub terms: Vec<(Complex64, HalfPlanePoint)>,
}

impl KernelCombination {
    pub fn new(weight: Weight, terms: Vec<(Complex64, HalfPlanePoint)>) -> Self {
        Self { weight, terms }
    }

    pub fn single(weight: Weight, omega: HalfPlanePoint) -> Self {
        Self::new(weight, vec![(Complex64::new(1.0, 0.0), omega)])
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, p)| c * self.weight.norm_const() / crate::numeric::cpow(p.z().conj() + z, self.weight.exponent()))
            .sum()
    }

    pub fn eval_point(&self, z: HalfPlanePoint) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, p)| c * bergman_kernel(&self.weight, *p, z))
            .sum()
    }

    /// `||f||^2 = sum_{i,j} c_i conj(c_j) k_{z_i}(z_j)`, exact.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ci, zi) in &self.terms {
            for (cj, zj) in &self.terms {
                acc += ci * cj.conj() * bergman_kernel(&self.weight, *zi, *zj);
            }
        }
        acc.re.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproducingResidual {
    /// `|<f, k_omega> - f(omega)|`
    pub residual: f64,
    /// `f(omega)` from the kernel formula.
    pub exact: Complex64,
    pub quadrature: InnerProduct,
    /// `||f||`, exact.
    pub norm: f64,
}

/// Compares `<f, k_omega>` by quadrature with `f(omega)`.
pub fn reproducing_check(
    f: &KernelCombination,
    omega: HalfPlanePoint,
    q: &QuadratureScheme,
) -> Result<ReproducingResidual> {
    let w = f.weight;
    let k_omega = KernelCombination::single(w, omega);
    let exact = f.eval_point(omega);
    let quadrature = if f.terms.is_empty() {
        InnerProduct {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
        }
    } else {
        inner_product(&w, |z| f.eval(z), |z| k_omega.eval(z), q)?
    };
    Ok(ReproducingResidual {
        residual: (quadrature.value - exact).norm(),
        exact,
        quadrature,
        norm: f.norm_sq().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(re: f64, im: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(re, im).unwrap()
    }

    fn scheme() -> QuadratureScheme {
        QuadratureScheme::new(SchemeParams::default()).unwrap()
    }

    #[test]
    fn scheme_nodes_are_positive() {
        let q = scheme();
        assert!(q.x_nodes.iter().all(|x| *x > 0.0));
        assert!(q.x_weights.iter().all(|w| *w > 0.0));
        assert!(q.y_weights.iter().all(|w| *w > 0.0));
        let tail = q.y_nodes.iter().filter(|y| y.abs() > 200.0).count();
        assert!(tail > 0 && tail < q.y_nodes.len() / 2);
        assert!(q.y_nodes.iter().all(|y| y.is_finite()));
    }

    #[test]
    fn kernel_inner_products() {
        let q = scheme();
        for (alpha, omega, z, expect) in [(0.0, 1.0, 1.0, 0.25), (1.0, 1.0, 1.0, 0.5), (0.0, 1.0, 2.0, 1.0 / 9.0)] {
            let w = Weight::new(alpha).unwrap();
            let f = KernelCombination::single(w, pt(omega, 0.0));
            let g = KernelCombination::single(w, pt(z, 0.0));
            let ip = inner_product(&w, |s| f.eval(s), |s| g.eval(s), &q).unwrap();
            assert_relative_eq!(ip.value.re, expect, max_relative = 1e-3);
            assert!(ip.value.im.abs() < 1e-3 * expect);
            assert!(ip.error_estimate < 1e-3 * expect);
        }
    }

    #[test]
    fn inner_product_is_conjugate_symmetric() {
        let q = QuadratureScheme::new(SchemeParams {
            n_x: 40,
            n_y: 88,
            y_max: 200.0,
        })
        .unwrap();
        let w = Weight::new(0.5).unwrap();
        let f = KernelCombination::new(
            w,
            vec![
                (Complex64::new(1.0, 2.0), pt(1.0, 1.0)),
                (Complex64::new(-0.5, 0.0), pt(2.0, -1.0)),
            ],
        );
        let g = KernelCombination::single(w, pt(0.7, 0.3));
        let fg = q.integrate(&w, |s| f.eval(s), |s| g.eval(s)).unwrap();
        let gf = q.integrate(&w, |s| g.eval(s), |s| f.eval(s)).unwrap();
        assert_relative_eq!((fg - gf.conj()).norm(), 0.0, epsilon = 1e-12 * fg.norm());
        let ff = q.integrate(&w, |s| f.eval(s), |s| f.eval(s)).unwrap();
        assert!(ff.re > 0.0 && ff.im.abs() <= 1e-12 * ff.re);
    }

    #[test]
    fn reproducing_examples() {
        let q = scheme();
        let w0 = Weight::new(0.0).unwrap();
        let f = KernelCombination::single(w0, pt(1.0, 0.0));
        let r = reproducing_check(&f, pt(2.0, 0.0), &q).unwrap();
        assert_relative_eq!(r.exact.re, 1.0 / 9.0, max_relative = 1e-15);
        assert!(r.residual <= 1e-3 * r.exact.norm());

        let empty = KernelCombination::new(w0, vec![]);
        assert_eq!(reproducing_check(&empty, pt(2.0, 0.0), &q).unwrap().residual, 0.0);

        let w1 = Weight::new(1.0).unwrap();
        let f = KernelCombination::new(
            w1,
            vec![
                (Complex64::new(1.0, 0.0), pt(1.0, 0.0)),
                (Complex64::new(-2.0, 0.0), pt(3.0, 0.0)),
            ],
        );
        let r = reproducing_check(&f, pt(1.0, 1.0), &q).unwrap();
        assert!(r.residual <= 1e-3 * r.norm, "{r:?}");
    }

    #[test]
    fn doubling_reduces_error() {
        let w = Weight::new(0.0).unwrap();
        let f = KernelCombination::single(w, pt(1.0, 0.0));
        let exact = 0.25;
        let mut params = SchemeParams {
            n_x: 8,
            n_y: 44,
            y_max: 200.0,
        };
        let mut prev = f64::INFINITY;
        for _ in 0..5 {
            let q = QuadratureScheme::new(params).unwrap();
            let err = (q.integrate(&w, |s| f.eval(s), |s| f.eval(s)).unwrap().re - exact).abs() / exact;
            if prev > 1e-6 {
                assert!(err * 4.0 <= prev, "{params:?}: {err} vs {prev}");
            }
            prev = err;
            params.n_x *= 2;
            params.n_y *= 2;
        }
    }
}
