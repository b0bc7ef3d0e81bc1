//! Reproducing kernels of the weighted Bergman spaces, the Nevanlinna kernel,
//! the kernels `K^n` built from a symbol, and positivity certification of the
//! Hermitian matrices they generate.
//!
//! Kernels are written `K(omega, z)`. A kernel matrix on points `x_1..x_n`
//! stores `M[i][j] = K(x_j, x_i)`, so that `c* M c = sum c_i conj(c_j) K(x_i, x_j)`
//! and for reproducing kernels `M[i][j] = <k_{x_j}, k_{x_i}>`.

use crate::error::{BergError, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::numeric::{cpow, cpowi};
use crate::symbols::{HalfPlanePoint, SampleGrid, SelfMap, Symbol};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Bergman weight `alpha > -1` with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Weight {
    alpha: f64,
    norm_const: f64,
    exponent: f64,
    half_exponent: f64,
}

impl Weight {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(BergError::InvalidWeight(alpha));
        }
        Ok(Self {
            alpha,
            norm_const: 2f64.powf(alpha) * (1.0 + alpha),
            exponent: 2.0 + alpha,
            half_exponent: (2.0 + alpha) / 2.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `2^alpha (1 + alpha)`
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// `2 + alpha`
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `(2 + alpha) / 2`
    pub fn half_exponent(&self) -> f64 {
        self.half_exponent
    }

    /// `||k_z||^2 = 2^alpha (1 + alpha) / (2 Re z)^{2 + alpha}`
    pub fn kernel_norm_sq(&self, z: HalfPlanePoint) -> f64 {
        self.norm_const / (2.0 * z.re()).powf(self.exponent)
    }
}

impl TryFrom<f64> for Weight {
    type Error = BergError;
    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.alpha
    }
}

/// `k_omega(z) = 2^alpha (1 + alpha) / (conj(omega) + z)^{2 + alpha}`.
pub fn bergman_kernel(w: &Weight, omega: HalfPlanePoint, z: HalfPlanePoint) -> Complex64 {
    w.norm_const / cpow(omega.z().conj() + z.z(), w.exponent)
}

/// Functions fed to the Nevanlinna kernel. Unlike symbols these need not map
/// into the half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnalyticFn {
    Symbol {
        symbol: Symbol,
    },
    Constant {
        value: Complex64,
    },
    /// `a z + b + c / z`
    Rational {
        a: Complex64,
        b: Complex64,
        c: Complex64,
    },
}

impl AnalyticFn {
    pub fn constant(v: f64) -> Self {
        AnalyticFn::Constant { value: v.into() }
    }

    pub fn identity() -> Self {
        AnalyticFn::Symbol {
            symbol: Symbol::identity(),
        }
    }

    pub fn rational(a: f64, b: f64, c: f64) -> Self {
        AnalyticFn::Rational {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFn::Symbol { symbol } => symbol.apply(z),
            AnalyticFn::Constant { value } => *value,
            AnalyticFn::Rational { a, b, c } => a * z + b + c / z,
        }
    }
}

/// Which kernel produced a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelId {
    Bergman { alpha: f64 },
    Nevanlinna { psi: AnalyticFn },
    Kn { symbol: Symbol, lambda: f64, n: u32 },
    Certificate { alpha: f64, symbol: Symbol, lambda: f64 },
    Schur { left: Box<KernelId>, right: Box<KernelId> },
    Shifted { base: Box<KernelId>, constant: f64 },
    Custom { label: String },
}

/// Hermitian matrix of kernel values at a point configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    pub points: Vec<HalfPlanePoint>,
    pub entries: CMatrix,
    pub kernel: KernelId,
    pub hermitian_defect: f64,
}

impl KernelMatrix {
    /// `M[i][j] = kernel(points[j], points[i])`.
    pub fn build(
        points: &[HalfPlanePoint],
        kernel: KernelId,
        mut f: impl FnMut(HalfPlanePoint, HalfPlanePoint) -> Result<Complex64>,
    ) -> Result<Self> {
        let n = points.len();
        let mut entries = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                entries.set(i, j, f(points[j], points[i])?);
            }
        }
        Ok(Self::from_entries(points.to_vec(), entries, kernel))
    }

    pub fn from_entries(points: Vec<HalfPlanePoint>, entries: CMatrix, kernel: KernelId) -> Self {
        let hermitian_defect = entries.hermitian_defect();
        Self {
            points,
            entries,
            kernel,
            hermitian_defect,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    /// Row-major `[re, im]` export for audit files.
    pub fn export(&self) -> MatrixExport {
        MatrixExport {
            kernel: self.kernel.clone(),
            points: self.points.iter().map(|p| [p.re(), p.im()]).collect(),
            rows: self
                .entries
                .rows()
                .map(|r| r.iter().map(|v| [v.re, v.im]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub kernel: KernelId,
    pub points: Vec<[f64; 2]>,
    pub rows: Vec<Vec<[f64; 2]>>,
}

/// Gram matrix of reproducing kernels with a conditioning diagnostic.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: KernelMatrix,
    /// Condition number of the unit-diagonal rescaling `D^{-1/2} G D^{-1/2}`.
    pub condition_estimate: f64,
    /// Set when `condition_estimate` exceeds [`CONDITION_WARNING`].
    pub ill_conditioned: bool,
}

pub const CONDITION_WARNING: f64 = 1e12;

/// `G[i][j] = <k_{z_j}, k_{z_i}> = k_{z_j}(z_i)`.
pub fn gram_matrix(w: &Weight, points: &[HalfPlanePoint]) -> Result<GramMatrix> {
    ensure_distinct(points)?;
    let matrix = KernelMatrix::build(points, KernelId::Bergman { alpha: w.alpha }, |omega, z| {
        Ok(bergman_kernel(w, omega, z))
    })?;
    let condition_estimate = unit_diagonal_condition(&matrix.entries);
    Ok(GramMatrix {
        ill_conditioned: condition_estimate > CONDITION_WARNING,
        matrix,
        condition_estimate,
    })
}

pub(crate) fn ensure_distinct(points: &[HalfPlanePoint]) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if let Some(q) = points[i + 1..].iter().find(|q| q.z() == p.z()) {
            return Err(BergError::SingularGram {
                first: p.z(),
                second: q.z(),
            });
        }
    }
    Ok(())
}

/// `D^{-1/2} M D^{-1/2}` for a matrix with positive diagonal.
pub fn unit_diagonal(m: &CMatrix) -> CMatrix {
    let d: Vec<f64> = (0..m.dim()).map(|i| m.get(i, i).re.sqrt()).collect();
    m.map_entries(|i, j, v| v / (d[i] * d[j]))
}

fn unit_diagonal_condition(m: &CMatrix) -> f64 {
    let e = hermitian_eigen(&unit_diagonal(m));
    if e.min() > 0.0 {
        e.max() / e.min()
    } else {
        f64::INFINITY
    }
}

/// Entries `(psi(z_i) + conj psi(z_j)) / (z_i + conj z_j)`.
pub fn nevanlinna_kernel(psi: &AnalyticFn, points: &[HalfPlanePoint]) -> Result<KernelMatrix> {
    let values: Vec<Complex64> = points.iter().map(|p| psi.apply(p.z())).collect();
    let n = points.len();
    let entries = CMatrix::from_fn(n, |i, j| {
        (values[i] + values[j].conj()) / (points[i].z() + points[j].z().conj())
    });
    Ok(KernelMatrix::from_entries(
        points.to_vec(),
        entries,
        KernelId::Nevanlinna { psi: psi.clone() },
    ))
}

/// `K^n(omega, z) = [(phi(z) + conj phi(omega))^n - lambda^{-n} (z + conj omega)^n] / (z + conj omega)^n`.
pub fn kn_kernel(phi: &SelfMap, lambda: f64, n: u32, omega: HalfPlanePoint, z: HalfPlanePoint) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BergError::NotPositive("lambda", lambda));
    }
    let sum_phi = phi.eval(z)? + phi.eval(omega)?.conj();
    let sum_z = z.z() + omega.z().conj();
    Ok(kn_from_sums(sum_phi, sum_z, lambda, n))
}

fn kn_from_sums(sum_phi: Complex64, sum_z: Complex64, lambda: f64, n: u32) -> Complex64 {
    let lam_n = lambda.powi(-(n as i32));
    let den = cpowi(sum_z, n);
    let num = cpowi(sum_phi, n) - lam_n * den;
    let v = num / den;
    if v.re.is_finite() && v.im.is_finite() {
        v
    } else {
        // powers overflowed; the ratio form is algebraically identical
        cpowi(sum_phi / sum_z, n) - lam_n
    }
}

pub fn kn_matrix(phi: &SelfMap, lambda: f64, n: u32, points: &[HalfPlanePoint]) -> Result<KernelMatrix> {
    let images = points.iter().map(|p| phi.eval(*p)).collect::<Result<Vec<_>>>()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BergError::NotPositive("lambda", lambda));
    }
    let m = points.len();
    let entries = CMatrix::from_fn(m, |i, j| {
        kn_from_sums(
            images[i] + images[j].conj(),
            points[i].z() + points[j].z().conj(),
            lambda,
            n,
        )
    });
    Ok(KernelMatrix::from_entries(
        points.to_vec(),
        entries,
        KernelId::Kn {
            symbol: phi.symbol().clone(),
            lambda,
            n,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResidual {
    pub max_abs: f64,
    /// Residual divided by `|q|^{2m} + lambda^{-2m}`, the size of the largest
    /// intermediate term (`q = (phi(z) + conj phi(omega)) / (z + conj omega)`).
    pub max_rel: f64,
    pub pairs: usize,
}

/// Max over pairs of `|K^{2m} - K^m (K^m + 2 lambda^{-m})|` with `m = 2^n`.
pub fn factorization_check(
    phi: &SelfMap,
    lambda: f64,
    n: u32,
    pairs: &[(HalfPlanePoint, HalfPlanePoint)],
) -> Result<FactorizationResidual> {
    let m = 1u32 << n;
    let lam_m = lambda.powi(-(m as i32));
    let mut out = FactorizationResidual {
        max_abs: 0.0,
        max_rel: 0.0,
        pairs: pairs.len(),
    };
    for &(omega, z) in pairs {
        let k_m = kn_kernel(phi, lambda, m, omega, z)?;
        let k_2m = kn_kernel(phi, lambda, 2 * m, omega, z)?;
        let residual = (k_2m - k_m * (k_m + 2.0 * lam_m)).norm();
        let q = (phi.eval(z)? + phi.eval(omega)?.conj()) / (z.z() + omega.z().conj());
        let scale = q.norm().powi(2 * m as i32) + lam_m * lam_m;
        out.max_abs = out.max_abs.max(residual);
        out.max_rel = out.max_rel.max(residual / scale);
    }
    Ok(out)
}

/// Entrywise (Schur) product.
pub fn schur_product(a: &KernelMatrix, b: &KernelMatrix) -> Result<KernelMatrix> {
    check_compatible(a, b)?;
    let entries = a.entries.map_entries(|i, j, v| v * b.entries.get(i, j));
    Ok(KernelMatrix::from_entries(
        a.points.clone(),
        entries,
        KernelId::Schur {
            left: Box::new(a.kernel.clone()),
            right: Box::new(b.kernel.clone()),
        },
    ))
}

/// Entrywise addition of a constant `c >= 0`.
pub fn add_constant(a: &KernelMatrix, c: f64) -> Result<KernelMatrix> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(BergError::NotPositive("constant", c));
    }
    Ok(KernelMatrix::from_entries(
        a.points.clone(),
        a.entries.map_entries(|_, _, v| v + c),
        KernelId::Shifted {
            base: Box::new(a.kernel.clone()),
            constant: c,
        },
    ))
}

fn check_compatible(a: &KernelMatrix, b: &KernelMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(BergError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.points != b.points {
        return Err(BergError::PointSetMismatch);
    }
    Ok(())
}

/// Relative Hermitian defect accepted by [`psd_check`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// PSD threshold `rel_tol * max(1, trace / size)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub rel_tol: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-9 }
    }
}

impl ThresholdPolicy {
    pub fn threshold(&self, m: &CMatrix) -> f64 {
        let n = m.dim().max(1) as f64;
        self.rel_tol * (m.trace().re / n).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub is_psd: bool,
    /// Unit vector `c` with `c* M c < 0`, present iff not PSD.
    pub witness: Option<Vec<Complex64>>,
    /// `max ||M v - lambda v||` of the eigensolver.
    pub eigen_residual: f64,
}

pub fn psd_check(m: &KernelMatrix, policy: ThresholdPolicy) -> Result<PsdVerdict> {
    psd_check_entries(&m.entries, policy)
}

/// Smallest eigenvalue of the Hermitian part against the threshold policy.
pub fn psd_check_entries(m: &CMatrix, policy: ThresholdPolicy) -> Result<PsdVerdict> {
    let defect = m.hermitian_defect();
    let tolerance = HERMITIAN_TOL * m.max_abs();
    if defect > tolerance {
        return Err(BergError::NotHermitian { defect, tolerance });
    }
    let h = m.hermitian_part();
    let eig = hermitian_eigen(&h);
    let threshold = policy.threshold(&h);
    let min_eigenvalue = eig.min();
    let is_psd = m.dim() == 0 || min_eigenvalue >= -threshold;
    Ok(PsdVerdict {
        min_eigenvalue,
        threshold,
        is_psd,
        witness: (!is_psd).then(|| eig.vectors[0].clone()),
        eigen_residual: eig.max_residual(&h),
    })
}

/// `trials` seeded random configurations of `count` points from the grid shells.
pub fn seeded_configurations(grid: &SampleGrid, count: usize, trials: usize, seed: u64) -> Vec<Vec<HalfPlanePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| grid.random_points(count, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::validate_self_map;
    use approx::assert_relative_eq;

    fn pt(re: f64, im: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(re, im).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn self_map(s: Symbol) -> SelfMap {
        validate_self_map(&s, &SampleGrid::default()).unwrap()
    }

    #[test]
    fn weight_rejects_alpha_at_or_below_minus_one() {
        assert!(Weight::new(-1.0).is_err());
        assert!(Weight::new(-3.0).is_err());
        let w = Weight::new(1.0).unwrap();
        assert_eq!(w.norm_const(), 4.0);
        assert_eq!(w.half_exponent(), 1.5);
    }

    #[test]
    fn bergman_kernel_examples() {
        let w0 = Weight::new(0.0).unwrap();
        let w1 = Weight::new(1.0).unwrap();
        assert_eq!(bergman_kernel(&w0, pt(1.0, 0.0), pt(1.0, 0.0)), c(0.25, 0.0));
        assert_eq!(bergman_kernel(&w1, pt(1.0, 0.0), pt(1.0, 0.0)), c(0.5, 0.0));
        let v = bergman_kernel(&w0, pt(1.0, 0.0), pt(1.0, 1.0));
        assert_relative_eq!((v - c(3.0 / 25.0, -4.0 / 25.0)).norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn gram_examples() {
        let w0 = Weight::new(0.0).unwrap();
        let g = gram_matrix(&w0, &[pt(1.0, 0.0)]).unwrap();
        assert_eq!(g.matrix.entries.get(0, 0), c(0.25, 0.0));
        let g = gram_matrix(&w0, &[pt(1.0, 0.0), pt(2.0, 0.0)]).unwrap();
        let e = &g.matrix.entries;
        assert_relative_eq!(e.get(0, 1).re, 1.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(e.get(1, 0).re, 1.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(e.get(1, 1).re, 1.0 / 16.0, max_relative = 1e-15);
        assert!(!g.ill_conditioned);
    }

    #[test]
    fn near_duplicate_points_warn() {
        let w0 = Weight::new(0.0).unwrap();
        let g = gram_matrix(&w0, &[pt(1.0, 0.0), pt(1.0 + 1e-9, 0.0)]).unwrap();
        assert!(g.condition_estimate > 1e12);
        assert!(g.ill_conditioned);
        assert!(matches!(
            gram_matrix(&w0, &[pt(1.0, 0.0), pt(1.0, 0.0)]),
            Err(BergError::SingularGram { .. })
        ));
    }

    #[test]
    fn nevanlinna_examples() {
        let pts = [pt(1.0, 0.0), pt(2.0, 0.0), pt(1.0, 1.0)];
        let m = nevanlinna_kernel(&AnalyticFn::identity(), &pts).unwrap();
        for row in m.entries.rows() {
            for v in row {
                assert_relative_eq!((v - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
            }
        }
        let m = nevanlinna_kernel(&AnalyticFn::constant(1.0), &pts[..2]).unwrap();
        assert_relative_eq!(m.entries.get(0, 1).re, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(m.entries.get(1, 1).re, 0.5, max_relative = 1e-15);

        let m = nevanlinna_kernel(&AnalyticFn::constant(-1.0), &pts[..1]).unwrap();
        assert_eq!(m.entries.get(0, 0), c(-1.0, 0.0));
        assert!(!psd_check(&m, ThresholdPolicy::default()).unwrap().is_psd);
    }

    #[test]
    fn kn_examples() {
        let one = pt(1.0, 0.0);
        let shift = self_map(Symbol::affine(1.0, 1.0));
        assert_eq!(kn_kernel(&shift, 1.0, 1, one, one).unwrap(), c(1.0, 0.0));
        let id = self_map(Symbol::identity());
        for n in 1..6 {
            assert_eq!(
                kn_kernel(&id, 1.0, n, pt(2.0, 1.0), pt(0.5, -3.0)).unwrap(),
                c(0.0, 0.0)
            );
        }
        let dilate = self_map(Symbol::affine(2.0, 0.0));
        assert_eq!(kn_kernel(&dilate, 0.5, 2, one, one).unwrap(), c(0.0, 0.0));
        assert!(kn_kernel(&dilate, 0.0, 2, one, one).is_err());
    }

    #[test]
    fn kn_matrix_matches_pointwise_kernel() {
        let phi = self_map(Symbol::affine(2.0, 1.0));
        let pts = [pt(1.0, 0.5), pt(3.0, -2.0), pt(10.0, 1.0)];
        let m = kn_matrix(&phi, 0.5, 4, &pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = kn_kernel(&phi, 0.5, 4, pts[j], pts[i]).unwrap();
                assert_relative_eq!(
                    (m.entries.get(i, j) - v).norm(),
                    0.0,
                    epsilon = 1e-12 * v.norm().max(1.0)
                );
            }
        }
    }

    #[test]
    fn factorization_examples() {
        let g = SampleGrid::default();
        let configs = seeded_configurations(&g, 2, 50, 7);
        let pairs: Vec<_> = configs.iter().map(|c| (c[0], c[1])).collect();
        let r = factorization_check(&self_map(Symbol::affine(1.0, 1.0)), 1.0, 0, &pairs).unwrap();
        assert!(r.max_abs <= 1e-12, "{r:?}");
        let r = factorization_check(&self_map(Symbol::affine(2.0, 1.0)), 0.5, 1, &pairs).unwrap();
        assert!(r.max_rel <= 1e-10, "{r:?}");
        let r = factorization_check(&self_map(Symbol::identity()), 1.0, 2, &pairs).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn schur_and_shift() {
        let pts = [pt(1.0, 0.0), pt(2.0, 0.0)];
        let id = KernelMatrix::from_entries(
            pts.to_vec(),
            CMatrix::identity(2),
            KernelId::Custom { label: "I".into() },
        );
        let sq = schur_product(&id, &id).unwrap();
        assert_eq!(sq.entries, CMatrix::identity(2));
        assert!(psd_check(&sq, ThresholdPolicy::default()).unwrap().is_psd);

        let zero = KernelMatrix::from_entries(pts.to_vec(), CMatrix::zeros(2), KernelId::Custom { label: "0".into() });
        let ones = add_constant(&zero, 1.0).unwrap();
        assert!(ones.entries.rows().flatten().all(|v| *v == c(1.0, 0.0)));
        assert!(psd_check(&ones, ThresholdPolicy::default()).unwrap().is_psd);
        assert!(add_constant(&zero, -1.0).is_err());

        let other = KernelMatrix::from_entries(
            vec![pts[0]],
            CMatrix::identity(1),
            KernelId::Custom { label: "x".into() },
        );
        assert!(matches!(
            schur_product(&id, &other),
            Err(BergError::DimensionMismatch { .. })
        ));
        let moved = KernelMatrix::from_entries(
            vec![pts[0], pt(3.0, 0.0)],
            CMatrix::identity(2),
            KernelId::Custom { label: "y".into() },
        );
        assert!(matches!(schur_product(&id, &moved), Err(BergError::PointSetMismatch)));

        let phi = self_map(Symbol::affine(1.0, 1.0));
        let three = [pt(1.0, 0.0), pt(2.0, 0.0), pt(3.0, 0.0)];
        let k1 = kn_matrix(&phi, 1.0, 1, &three).unwrap();
        let prod = schur_product(&k1, &k1).unwrap();
        let v = psd_check(&prod, ThresholdPolicy::default()).unwrap();
        assert!(v.is_psd && v.min_eigenvalue >= 0.0, "{v:?}");
    }

    #[test]
    fn psd_check_examples() {
        let pts: Vec<_> = (1..=3).map(|k| pt(k as f64, 0.0)).collect();
        let id = KernelMatrix::from_entries(
            pts.clone(),
            CMatrix::identity(3),
            KernelId::Custom { label: "I".into() },
        );
        let v = psd_check(&id, ThresholdPolicy::default()).unwrap();
        assert!(v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, 1.0, epsilon = 1e-15);
        assert!(v.witness.is_none());

        let m = CMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let v = psd_check_entries(&m, ThresholdPolicy::default()).unwrap();
        assert!(!v.is_psd);
        assert_relative_eq!(v.min_eigenvalue, -1.0, epsilon = 1e-14);
        let wv = v.witness.unwrap();
        assert_relative_eq!((wv[0] + wv[1]).norm(), 0.0, epsilon = 1e-14);
        assert!(m.quadratic_form(&wv).re < 0.0);

        // K^1 for z + 1 at {1, 2}
        let phi = self_map(Symbol::affine(1.0, 1.0));
        let k1 = kn_matrix(&phi, 1.0, 1, &pts[..2]).unwrap();
        assert_relative_eq!(k1.entries.get(0, 1).re, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(k1.entries.get(1, 1).re, 0.5, max_relative = 1e-15);
        assert!(psd_check(&k1, ThresholdPolicy::default()).unwrap().is_psd);
    }

    #[test]
    fn psd_check_rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(
            psd_check_entries(&m, ThresholdPolicy::default()),
            Err(BergError::NotHermitian { .. })
        ));
    }

    #[test]
    fn export_is_row_major_pairs() {
        let w0 = Weight::new(0.0).unwrap();
        let g = gram_matrix(&w0, &[pt(1.0, 0.0), pt(2.0, 0.0)]).unwrap();
        let json = serde_json::to_value(g.matrix.export()).unwrap();
        assert_eq!(json["rows"][0][0], serde_json::json!([0.25, 0.0]));
        assert_eq!(json["kernel"]["kind"], "bergman");
    }
}
