//! Cross-checks against independent implementations: nalgebra for the dense
//! eigenproblems, libm and numpy for the frozen scalar values.

use approx::assert_relative_eq;
use bergkit::kernels::bergman_kernel;
use bergkit::linalg::{generalized_hermitian_eigen, hermitian_eigen, CMatrix};
use bergkit::numeric::{gamma, gauss_legendre};
use bergkit::opnorm::gram_norm_estimate;
use bergkit::symbols::validate_self_map;
use bergkit::{HalfPlanePoint, SampleGrid, Symbol, Weight};
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    a.map_entries(|i, j, v| (v + a.get(j, i).conj()) * 0.5)
}

fn sorted_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn hermitian_eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2, 5, 12, 24] {
        let m = random_hermitian(n, &mut rng);
        let ours = hermitian_eigen(&m);
        let theirs = sorted_eigenvalues(to_na(&m));
        let scale = m.norm();
        for (a, b) in ours.values.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-12 * scale, "n={n}: {a} vs {b}");
        }
        assert!(ours.max_residual(&m) <= 1e-12 * scale);
    }
}

#[test]
fn generalized_eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [3, 8, 16] {
        let h = random_hermitian(n, &mut rng);
        let b = CMatrix::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        // B B* + I is comfortably positive definite
        let g = CMatrix::from_fn(n, |i, j| {
            let mut s: Complex64 = (0..n).map(|k| b.get(i, k) * b.get(j, k).conj()).sum();
            if i == j {
                s += 1.0;
            }
            s
        });
        let ours = generalized_hermitian_eigen(&h, &g, 1e-12);
        assert!(ours.dropped.is_empty());

        let l = Cholesky::new(to_na(&g)).unwrap().l();
        let l_inv = l.clone().try_inverse().unwrap();
        let c = &l_inv * to_na(&h) * l_inv.adjoint();
        let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
        let theirs = sorted_eigenvalues(c);
        for (a, b) in ours.eigen.values.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn gram_norm_matches_nalgebra_pipeline() {
    let w = Weight::new(1.0).unwrap();
    let phi = validate_self_map(&Symbol::affine(2.0, 1.0), &SampleGrid::default()).unwrap();
    let pts: Vec<HalfPlanePoint> = SampleGrid::new(1.0, 1e3, 6, 1, 0.5).unwrap().real_axis_points(6);
    let ours = gram_norm_estimate(&w, &phi, &pts).unwrap();

    let images: Vec<HalfPlanePoint> = pts.iter().map(|p| phi.eval_point(*p).unwrap()).collect();
    let n = pts.len();
    let g = DMatrix::from_fn(n, n, |i, j| bergman_kernel(&w, pts[j], pts[i]));
    let h = DMatrix::from_fn(n, n, |i, j| bergman_kernel(&w, images[j], images[i]));
    let l_inv = Cholesky::new(g).unwrap().l().try_inverse().unwrap();
    let c = &l_inv * h * l_inv.adjoint();
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let top = sorted_eigenvalues(c).last().copied().unwrap();
    assert_relative_eq!(ours.value, top.sqrt(), max_relative = 1e-9);
}

#[test]
fn gamma_matches_libm() {
    // values from the C library tgamma
    let table = [
        (0.5, 1.7724538509055159),
        (1.0 / 3.0, 2.678938534707748),
        (2.7, 1.5446858458505939),
        (4.5, 11.631728396567446),
        (7.25, 1155.3810139199893),
        (-0.5, -3.544907701811032),
        (-2.3, -1.447107394255918),
        (0.01, 99.43258511915059),
        (20.5, 5.406242982335075e17),
    ];
    for (x, want) in table {
        assert_relative_eq!(gamma(x), want, max_relative = 1e-13);
    }
}

#[test]
fn gauss_legendre_matches_numpy() {
    let nodes = [-0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0];
    let weights = [
        0.12948496616887065,
        0.2797053914892766,
        0.3818300505051183,
        0.41795918367346896,
    ];
    let (x, w) = gauss_legendre(7);
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    for (k, &i) in order.iter().take(4).enumerate() {
        assert!((x[i] - nodes[k]).abs() <= 1e-15);
        assert!((w[i] - weights[k]).abs() <= 1e-15);
    }
}
