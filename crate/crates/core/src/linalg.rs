//! Small dense complex linear algebra: a square matrix type, a cyclic Jacobi
//! eigensolver for Hermitian matrices, and the pivoted Cholesky reduction of
//! the generalized problem `H v = mu G v`.
//!
//! Matrices here are at most a few dozen rows, so the routines favour
//! robustness over speed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self::from_fn(dim, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                defect = defect.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        defect
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v* M v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Complex64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        Self::from_fn(self.dim, |i, j| f(i, j, self.get(i, j)))
    }

    /// Principal submatrix on the given index list, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
    pub sweeps: usize,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `max_k ||M v_k - lambda_k v_k||`.
    pub fn max_residual(&self, m: &CMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(lam, v)| {
                m.mul_vec(v)
                    .iter()
                    .zip(v)
                    .map(|(mv, vk)| (mv - lam * vk).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi rotations on the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.norm();
    let mut sweeps = 0;

    if n > 0 && scale > 0.0 {
        while sweeps < MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
                .map(|(i, j)| a.get(i, j).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    HermitianEigen {
        values: order.iter().map(|&k| a.get(k, k).re).collect(),
        vectors: order.iter().map(|&k| (0..n).map(|i| v.get(i, k)).collect()).collect(),
        sweeps,
    }
}

/// One Jacobi rotation annihilating `a[p][q]`. The rotation is the phase
/// change `diag(1, e^{-i arg a_pq})` followed by a real Givens rotation.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let phase = apq / g;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -s * phase.conj();
    let jqq = c * phase.conj();

    let n = a.dim();
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * jpp + akq * jqp);
        a.set(k, q, akp * jpq + akq * jqq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, jpp.conj() * apk + jqp.conj() * aqk);
        a.set(q, k, jpq.conj() * apk + jqq.conj() * aqk);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * jpp + vkq * jqp);
        v.set(k, q, vkp * jpq + vkq * jqq);
    }
}

/// Cholesky factor of a Hermitian positive semidefinite matrix computed with
/// diagonal pivoting. Pivoting stops once the largest remaining Schur
/// complement diagonal drops below `rel_tol` times the first pivot; the
/// remaining indices are reported as dropped.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Indices kept, in pivot order.
    pub kept: Vec<usize>,
    /// Indices not factored because their pivot was too small.
    pub dropped: Vec<usize>,
    /// Lower-triangular factor of `G[kept, kept]`, rank x rank.
    pub factor: CMatrix,
    pub pivots: Vec<f64>,
}

pub fn pivoted_cholesky(g: &CMatrix, rel_tol: f64) -> PivotedCholesky {
    let n = g.dim();
    let mut a = g.hermitian_part();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = CMatrix::zeros(n);
    let mut pivots = Vec::new();
    let mut rank = 0;

    for k in 0..n {
        let (j, d) = (k..n)
            .map(|j| (j, a.get(j, j).re))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty range");
        let first = pivots.first().copied().unwrap_or(d);
        if !(d > 0.0) || d < rel_tol * first {
            break;
        }
        if j != k {
            perm.swap(j, k);
            swap_sym(&mut a, j, k);
            for m in 0..k {
                let t = l.get(j, m);
                l.set(j, m, l.get(k, m));
                l.set(k, m, t);
            }
        }
        let lkk = d.sqrt();
        pivots.push(d);
        l.set(k, k, Complex64::new(lkk, 0.0));
        for i in (k + 1)..n {
            l.set(i, k, a.get(i, k) / lkk);
        }
        for i in (k + 1)..n {
            for m in (k + 1)..n {
                let upd = l.get(i, k) * l.get(m, k).conj();
                a.set(i, m, a.get(i, m) - upd);
            }
        }
        rank += 1;
    }

    let factor = CMatrix::from_fn(rank, |i, j| if j <= i { l.get(i, j) } else { ZERO });
    PivotedCholesky {
        kept: perm[..rank].to_vec(),
        dropped: perm[rank..].to_vec(),
        factor,
        pivots,
    }
}

fn swap_sym(a: &mut CMatrix, i: usize, j: usize) {
    let n = a.dim();
    for k in 0..n {
        let t = a.get(i, k);
        a.set(i, k, a.get(j, k));
        a.set(j, k, t);
    }
    for k in 0..n {
        let t = a.get(k, i);
        a.set(k, i, a.get(k, j));
        a.set(k, j, t);
    }
}

/// Solves `L X = B` for lower-triangular `L`.
fn forward_substitute(l: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = l.dim();
    let mut x = CMatrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = b.get(i, col);
            for k in 0..i {
                s -= l.get(i, k) * x.get(k, col);
            }
            x.set(i, col, s / l.get(i, i));
        }
    }
    x
}

/// Result of reducing `H v = mu G v` to a standard Hermitian problem.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub eigen: HermitianEigen,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

/// Eigenvalues of `H v = mu G v` with `G` Hermitian positive semidefinite.
/// `G` is factored with diagonal pivoting; indices whose pivot falls below
/// `rel_tol` are removed from both matrices, which restricts the problem to
/// the span of the remaining basis vectors.
pub fn generalized_hermitian_eigen(h: &CMatrix, g: &CMatrix, rel_tol: f64) -> GeneralizedEigen {
    assert_eq!(h.dim(), g.dim());
    let chol = pivoted_cholesky(g, rel_tol);
    let h_kept = h.submatrix(&chol.kept).hermitian_part();
    // C = L^{-1} H L^{-*}
    let y = forward_substitute(&chol.factor, &h_kept);
    let c = forward_substitute(&chol.factor, &y.adjoint()).hermitian_part();
    GeneralizedEigen {
        eigen: hermitian_eigen(&c),
        kept: chol.kept,
        dropped: chol.dropped,
    }
}
