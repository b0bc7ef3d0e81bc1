//! Norm, spectral radius and essential-norm estimates for composition
//! operators `C_phi f = f o phi` on `A^2_alpha`.
//!
//! Every estimator works on the adjoint side through `C_phi^* k_z = k_{phi(z)}`.
//! The kernel-ratio and Gram estimates are lower bounds for `||C_phi||`; the
//! only upper-side evidence is the PSD certificate at finite configurations.

use crate::error::{BergError, Result};
use crate::kernels::{
    bergman_kernel, ensure_distinct, psd_check_entries, unit_diagonal, KernelId, KernelMatrix, PsdVerdict,
    ThresholdPolicy, Weight,
};
use crate::linalg::{generalized_hermitian_eigen, CMatrix};
use crate::symbols::{
    angular_derivative_estimate, HalfPlanePoint, SampleGrid, SelfMap, Symbol, Verdict, OVERFLOW_LIMIT,
};
use serde::{Deserialize, Serialize};

/// Relative pivot below which a Gram point is dropped.
pub const GRAM_PIVOT_TOL: f64 = 1e-12;
/// Points used by the Gram estimate inside [`boundedness_verdict`].
pub const GRAM_POINTS: usize = 16;
/// Iterates used by the spectral-radius estimate inside [`boundedness_verdict`].
pub const SPECTRAL_ITERATES: usize = 8;

/// `lambda^{(2 + alpha)/2}`, the norm of `C_phi` when the angular derivative
/// at infinity is `lambda`. Integer exponents are evaluated by repeated
/// multiplication.
pub fn norm_theoretical(w: &Weight, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BergError::NotPositive("lambda", lambda));
    }
    let h = w.half_exponent();
    if h.fract() == 0.0 && h <= i32::MAX as f64 {
        Ok(lambda.powi(h as i32))
    } else {
        Ok(lambda.powf(h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KernelRatio,
    GramEig,
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Shell radius, or number of points for Gram traces.
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub method: Method,
    /// Largest value observed; a lower bound for the norm.
    pub value: f64,
    /// The observed values diverge; the operator is reported unbounded.
    pub unbounded: bool,
    pub points_used: usize,
    pub trace: Vec<TracePoint>,
    pub lambda_used: Option<f64>,
    pub verdict: Option<Verdict>,
    /// Gram points removed by the pivot tolerance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<HalfPlanePoint>,
}

/// `sup_z ||C_phi^* k_z|| / ||k_z|| = sup_z (Re z / Re phi(z))^{(2+alpha)/2}` over the grid.
pub fn kernel_ratio_bound(w: &Weight, phi: &SelfMap, grid: &SampleGrid) -> Result<NormEstimate> {
    let est = angular_derivative_estimate(phi, grid)?;
    let h = w.half_exponent();
    Ok(NormEstimate {
        method: Method::KernelRatio,
        value: est.sup_ratio.powf(h),
        unbounded: est.verdict == Verdict::Divergent,
        points_used: grid.len(),
        trace: est
            .trace
            .iter()
            .map(|s| TracePoint {
                at: s.radius,
                value: s.max_ratio.powf(h),
            })
            .collect(),
        lambda_used: est.lambda_hat,
        verdict: Some(est.verdict),
        dropped: Vec::new(),
    })
}

/// Square root of the largest eigenvalue of `H v = mu G v` with
/// `G[i][j] = <k_{z_j}, k_{z_i}>` and `H[i][j] = <k_{phi(z_j)}, k_{phi(z_i)}>`:
/// the norm of `C_phi^*` restricted to the span of the kernels at `points`.
///
/// Both matrices are rescaled by `diag(G)^{-1/2}` first (a congruence, which
/// leaves the eigenvalues unchanged). The trace holds the estimate for the
/// leading 1, 2, 4, ... points.
pub fn gram_norm_estimate(w: &Weight, phi: &SelfMap, points: &[HalfPlanePoint]) -> Result<NormEstimate> {
    if points.is_empty() {
        return Err(BergError::InvalidGrid("Gram estimate needs at least one point".into()));
    }
    ensure_distinct(points)?;
    let (g, h) = normalized_pair(w, phi, points)?;

    let mut sizes: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|k| *k < points.len())
        .collect();
    sizes.push(points.len());

    let mut trace = Vec::with_capacity(sizes.len());
    let mut last = None;
    for k in sizes {
        let idx: Vec<usize> = (0..k).collect();
        let ge = generalized_hermitian_eigen(&h.submatrix(&idx), &g.submatrix(&idx), GRAM_PIVOT_TOL);
        trace.push(TracePoint {
            at: k as f64,
            value: ge.eigen.max().max(0.0).sqrt(),
        });
        last = Some(ge);
    }
    let ge = last.expect("at least one size");
    Ok(NormEstimate {
        method: Method::GramEig,
        value: ge.eigen.max().max(0.0).sqrt(),
        unbounded: false,
        points_used: ge.kept.len(),
        trace,
        lambda_used: None,
        verdict: None,
        dropped: ge.dropped.iter().map(|&i| points[i]).collect(),
    })
}

/// `diag(G)^{-1/2} G diag(G)^{-1/2}` and the same congruence applied to `H`.
fn normalized_pair(w: &Weight, phi: &SelfMap, points: &[HalfPlanePoint]) -> Result<(CMatrix, CMatrix)> {
    let images = points.iter().map(|p| phi.eval_point(*p)).collect::<Result<Vec<_>>>()?;
    let n = points.len();
    let g = CMatrix::from_fn(n, |i, j| bergman_kernel(w, points[j], points[i]));
    let h = CMatrix::from_fn(n, |i, j| bergman_kernel(w, images[j], images[i]));
    let d: Vec<f64> = (0..n).map(|i| g.get(i, i).re.sqrt()).collect();
    let h = h.map_entries(|i, j, v| v / (d[i] * d[j]));
    Ok((unit_diagonal(&g), h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: PsdVerdict,
    pub matrix: KernelMatrix,
}

/// PSD test of `lambda^{2+alpha} G - H`, rescaled by `diag(G)^{-1/2}` on both
/// sides. PSD at every configuration tried is evidence (not proof) that
/// `||C_phi|| <= lambda^{(2+alpha)/2}`.
pub fn psd_boundedness_certificate(
    w: &Weight,
    phi: &SelfMap,
    lambda: f64,
    points: &[HalfPlanePoint],
) -> Result<Certificate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BergError::NotPositive("lambda", lambda));
    }
    ensure_distinct(points)?;
    let (g, h) = normalized_pair(w, phi, points)?;
    let scale = lambda.powf(w.exponent());
    let entries = g.map_entries(|i, j, v| scale * v - h.get(i, j));
    let matrix = KernelMatrix::from_entries(
        points.to_vec(),
        entries,
        KernelId::Certificate {
            alpha: w.alpha(),
            symbol: phi.symbol().clone(),
            lambda,
        },
    );
    let verdict = psd_check_entries(&matrix.entries, ThresholdPolicy::default())?;
    Ok(Certificate { verdict, matrix })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadiusEstimate {
    /// `||C_{phi^n}||`-estimate`^{1/n}` for `n = 1..=max_iter`.
    pub per_iterate: Vec<f64>,
    pub estimate: f64,
    /// Some iterate diverged, so the values are not norm estimates.
    pub unbounded: bool,
}

/// Gelfand-formula estimate using `C_phi^n = C_{phi o ... o phi}` and the
/// kernel-ratio bound of each iterate.
pub fn spectral_radius_estimate(
    w: &Weight,
    phi: &SelfMap,
    max_iter: usize,
    grid: &SampleGrid,
) -> Result<SpectralRadiusEstimate> {
    if max_iter == 0 {
        return Err(BergError::InvalidSymbol("max_iter must be at least 1".into()));
    }
    let mut per_iterate = Vec::with_capacity(max_iter);
    let mut unbounded = false;
    let mut iterate = phi.clone();
    for n in 1..=max_iter {
        if n > 1 {
            iterate = phi.compose(&iterate);
            let scale = iterate.symbol().coefficient_scale();
            if !scale.is_finite() || scale > OVERFLOW_LIMIT {
                return Err(BergError::Overflow(n));
            }
        }
        let est = kernel_ratio_bound(w, &iterate, grid)?;
        unbounded |= est.unbounded;
        per_iterate.push(est.value.powf(1.0 / n as f64));
    }
    Ok(SpectralRadiusEstimate {
        estimate: *per_iterate.last().expect("max_iter >= 1"),
        per_iterate,
        unbounded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialNormBound {
    /// Sup of the normalized-kernel ratio over the far-field shells.
    pub lower_bound: f64,
    pub norm_theoretical: Option<f64>,
    /// `norm_theoretical - lower_bound`, the part this estimator cannot close.
    pub gap: Option<f64>,
}

/// Normalized kernels `k_z / ||k_z||` tend weakly to 0 as `z -> infinity`, so
/// `sup_{|z| >= sqrt(r_min r_max)} (Re z / Re phi(z))^{(2+alpha)/2}` bounds the
/// essential norm from below.
pub fn essential_norm_lower_bound(w: &Weight, phi: &SelfMap, grid: &SampleGrid) -> Result<EssentialNormBound> {
    let est = angular_derivative_estimate(phi, grid)?;
    let r_far = grid.far_field_radius();
    let h = w.half_exponent();
    let lower_bound = est
        .trace
        .iter()
        .filter(|s| s.radius >= r_far)
        .map(|s| s.max_ratio.powf(h))
        .fold(0.0, f64::max);
    let norm_theoretical = match phi.known_lambda().or(est.lambda_hat) {
        Some(l) => Some(norm_theoretical(w, l)?),
        None => None,
    };
    Ok(EssentialNormBound {
        lower_bound,
        norm_theoretical,
        gap: norm_theoretical.map(|n| n - lower_bound),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub alpha: f64,
    pub symbol: Symbol,
    pub verdict: Boundedness,
    pub lambda_hat: Option<f64>,
    pub lambda_known: Option<f64>,
    pub theoretical: Option<f64>,
    pub kernel_ratio: NormEstimate,
    pub gram: Option<NormEstimate>,
    pub spectral_radius: Option<f64>,
    pub essential_lower_bound: Option<f64>,
}

/// Combines the angular-derivative estimate with all estimators.
pub fn boundedness_verdict(w: &Weight, phi: &SelfMap, grid: &SampleGrid) -> Result<BoundednessReport> {
    let kernel_ratio = kernel_ratio_bound(w, phi, grid)?;
    let verdict = match kernel_ratio.verdict {
        Some(Verdict::Finite) => Boundedness::Bounded,
        Some(Verdict::Divergent) => Boundedness::Unbounded,
        _ => Boundedness::Inconclusive,
    };
    let lambda_hat = kernel_ratio.lambda_used;
    let lambda_known = phi.known_lambda();
    let mut report = BoundednessReport {
        alpha: w.alpha(),
        symbol: phi.symbol().clone(),
        verdict,
        lambda_hat,
        lambda_known,
        theoretical: None,
        kernel_ratio,
        gram: None,
        spectral_radius: None,
        essential_lower_bound: None,
    };
    if verdict != Boundedness::Bounded {
        return Ok(report);
    }
    let lambda = lambda_known.or(lambda_hat).expect("finite verdict carries lambda_hat");
    report.theoretical = Some(norm_theoretical(w, lambda)?);
    report.gram = Some(gram_norm_estimate(w, phi, &grid.real_axis_points(GRAM_POINTS))?);
    report.spectral_radius = match spectral_radius_estimate(w, phi, SPECTRAL_ITERATES, grid) {
        Ok(s) => Some(s.estimate),
        Err(BergError::Overflow(_)) => None,
        Err(e) => return Err(e),
    };
    report.essential_lower_bound = Some(essential_norm_lower_bound(w, phi, grid)?.lower_bound);
    Ok(report)
}

/// Flat summary of one estimate, the JSON record written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: Method,
    pub value: f64,
    pub lambda_hat: Option<f64>,
    pub theoretical: Option<f64>,
    pub points: usize,
    pub seed: Option<u64>,
    pub trace: Vec<TracePoint>,
    pub verdict: Option<Verdict>,
}

impl EstimateReport {
    pub fn from_estimate(e: &NormEstimate, theoretical: Option<f64>, seed: Option<u64>) -> Self {
        Self {
            method: e.method,
            value: e.value,
            lambda_hat: e.lambda_used,
            theoretical,
            points: e.points_used,
            seed,
            trace: e.trace.clone(),
            verdict: e.verdict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::validate_self_map;
    use approx::assert_relative_eq;

    fn w(alpha: f64) -> Weight {
        Weight::new(alpha).unwrap()
    }

    fn map(s: Symbol) -> SelfMap {
        validate_self_map(&s, &SampleGrid::default()).unwrap()
    }

    fn pt(x: f64) -> HalfPlanePoint {
        HalfPlanePoint::real(x).unwrap()
    }

    #[test]
    fn theoretical_examples() {
        assert_eq!(norm_theoretical(&w(0.0), 2.0).unwrap(), 2.0);
        assert_eq!(norm_theoretical(&w(2.0), 4.0).unwrap(), 16.0);
        for alpha in [-0.5, 0.0, 1.3, 6.0] {
            assert_eq!(norm_theoretical(&w(alpha), 1.0).unwrap(), 1.0);
        }
        assert!(norm_theoretical(&w(0.0), 0.0).is_err());
        assert!(norm_theoretical(&w(0.0), f64::INFINITY).is_err());
    }

    #[test]
    fn kernel_ratio_examples() {
        let g = SampleGrid::default();
        let e = kernel_ratio_bound(&w(0.0), &map(Symbol::affine(2.0, 0.0)), &g).unwrap();
        assert_relative_eq!(e.value, 0.5, max_relative = 1e-15);
        assert!(e.trace.iter().all(|t| (t.value - 0.5).abs() < 1e-15));

        let shift = map(Symbol::affine(1.0, 1.0));
        let small = kernel_ratio_bound(&w(0.0), &shift, &SampleGrid::with_r_max(1e4)).unwrap();
        let large = kernel_ratio_bound(&w(0.0), &shift, &g).unwrap();
        assert!(small.value < large.value && large.value < 1.0);
        assert_relative_eq!(large.value, 1e6 / (1e6 + 1.0), max_relative = 1e-12);

        let root = kernel_ratio_bound(&w(0.0), &map(Symbol::power(0.5)), &g).unwrap();
        assert!(root.unbounded);
        assert!(root.value >= 1e3);
    }

    #[test]
    fn kernel_ratio_matches_kernel_norms() {
        // ||k_{phi(z)}|| / ||k_z|| evaluated from the reproducing kernel itself
        let alpha = 1.7;
        let wt = w(alpha);
        let phi = map(Symbol::affine(3.0, 2.0));
        let z = HalfPlanePoint::new(40.0, 12.0).unwrap();
        let pz = phi.eval_point(z).unwrap();
        let direct = (bergman_kernel(&wt, pz, pz).re / bergman_kernel(&wt, z, z).re).sqrt();
        let g = SampleGrid::new(40.0f64.hypot(12.0), 4e4, 6, 1, 0.5).unwrap();
        let closed = (z.re() / pz.re()).powf(wt.half_exponent());
        assert_relative_eq!(direct, closed, max_relative = 1e-12);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn gram_examples() {
        let e = gram_norm_estimate(&w(0.0), &map(Symbol::affine(2.0, 0.0)), &[pt(1.0)]).unwrap();
        assert_relative_eq!(e.value, 0.5, max_relative = 1e-15);
        for alpha in [0.0, 1.0, 2.5] {
            let e = gram_norm_estimate(&w(alpha), &map(Symbol::identity()), &[pt(1.0)]).unwrap();
            assert_relative_eq!(e.value, 1.0, max_relative = 1e-15);
        }

        let g = SampleGrid::new(1.0, 1e4, 2, 1, 0.5).unwrap();
        let pts = g.real_axis_points(16);
        let e = gram_norm_estimate(&w(1.0), &map(Symbol::affine(2.0, 1.0)), &pts).unwrap();
        let theory = norm_theoretical(&w(1.0), 0.5).unwrap();
        assert_relative_eq!(theory, 0.5f64.powf(1.5), max_relative = 1e-15);
        assert!(e.value <= theory * (1.0 + 1e-6));
        assert!(e.value >= 0.98 * theory, "{} vs {theory}", e.value);
        assert!(e.trace.windows(2).all(|p| p[1].value >= p[0].value - 1e-9));
    }

    #[test]
    fn gram_rejects_duplicates() {
        let r = gram_norm_estimate(&w(0.0), &map(Symbol::identity()), &[pt(1.0), pt(1.0)]);
        assert!(matches!(r, Err(BergError::SingularGram { .. })));
    }

    #[test]
    fn certificate_examples() {
        let pts = [pt(1.0), pt(2.0), pt(4.0)];
        for alpha in [0.0, 1.5] {
            let c = psd_boundedness_certificate(&w(alpha), &map(Symbol::identity()), 1.0, &pts).unwrap();
            assert_eq!(c.matrix.entries.max_abs(), 0.0);
            assert!(c.verdict.is_psd);
        }
        let phi = map(Symbol::affine(2.0, 1.0));
        let c = psd_boundedness_certificate(&w(0.0), &phi, 0.5, &pts).unwrap();
        assert!(
            c.verdict.is_psd && c.verdict.min_eigenvalue >= -1e-12,
            "{:?}",
            c.verdict
        );
        let c = psd_boundedness_certificate(&w(0.0), &phi, 0.4, &[pt(1e3), pt(1e4)]).unwrap();
        assert!(!c.verdict.is_psd);
        assert!(c.verdict.witness.is_some());
    }

    #[test]
    fn spectral_radius_examples() {
        let g = SampleGrid::default();
        let s = spectral_radius_estimate(&w(0.0), &map(Symbol::affine(2.0, 1.0)), 8, &g).unwrap();
        assert!(s.per_iterate.iter().all(|v| (v - 0.5).abs() < 0.01));
        let s = spectral_radius_estimate(&w(0.0), &map(Symbol::affine(1.0, 1.0)), 8, &g).unwrap();
        assert!((s.estimate - 1.0).abs() < 0.01);
        for alpha in [0.0, 2.0] {
            let s = spectral_radius_estimate(&w(alpha), &map(Symbol::identity()), 4, &g).unwrap();
            assert_eq!(s.estimate, 1.0);
        }
        let huge = map(Symbol::affine(1e200, 0.0));
        assert!(matches!(
            spectral_radius_estimate(&w(0.0), &huge, 3, &g),
            Err(BergError::Overflow(2))
        ));
    }

    #[test]
    fn essential_norm_examples() {
        let g = SampleGrid::with_r_max(1e8);
        let e = essential_norm_lower_bound(&w(0.0), &map(Symbol::affine(2.0, 0.0)), &g).unwrap();
        assert_relative_eq!(e.lower_bound, 0.5, max_relative = 1e-15);
        let e = essential_norm_lower_bound(&w(1.0), &map(Symbol::affine(1.0, 10.0)), &g).unwrap();
        assert!(e.lower_bound > 0.999 && e.lower_bound < 1.0);
        let e = essential_norm_lower_bound(&w(3.0), &map(Symbol::identity()), &g).unwrap();
        assert_eq!(e.lower_bound, 1.0);
        assert_eq!(e.gap, Some(0.0));
    }

    #[test]
    fn verdict_examples() {
        let g = SampleGrid::default();
        let r = boundedness_verdict(&w(0.5), &map(Symbol::affine(3.0, 2.0)), &g).unwrap();
        assert_eq!(r.verdict, Boundedness::Bounded);
        assert_relative_eq!(r.theoretical.unwrap(), (1.0f64 / 3.0).powf(1.25), max_relative = 1e-14);
        assert!(r.gram.is_some() && r.spectral_radius.is_some() && r.essential_lower_bound.is_some());

        let r = boundedness_verdict(&w(1.0), &map(Symbol::power(0.5)), &g).unwrap();
        assert_eq!(r.verdict, Boundedness::Unbounded);
        assert!(r.theoretical.is_none());

        let r = boundedness_verdict(&w(2.0), &map(Symbol::identity()), &g).unwrap();
        assert_eq!(r.verdict, Boundedness::Bounded);
        assert_eq!(r.theoretical, Some(1.0));
    }
}
