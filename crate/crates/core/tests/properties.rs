use bergkit::kernels::{
    bergman_kernel, gram_matrix, kn_kernel, kn_matrix, nevanlinna_kernel, psd_check, AnalyticFn, ThresholdPolicy,
};
use bergkit::laplace::{laplace_eval, HalfLineFunction, Monomial};
use bergkit::numeric::gamma;
use bergkit::opnorm::{gram_norm_estimate, kernel_ratio_bound, norm_theoretical};
use bergkit::space::{inner_product, KernelCombination, QuadratureScheme, SchemeParams};
use bergkit::symbols::{angular_derivative_estimate, validate_self_map};
use bergkit::{HalfPlanePoint, SampleGrid, SelfMap, Symbol, Weight};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn affine(a: f64, b: f64) -> SelfMap {
    validate_self_map(&Symbol::affine(a, b), &SampleGrid::default()).unwrap()
}

fn point() -> impl Strategy<Value = HalfPlanePoint> {
    (0.05f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| HalfPlanePoint::new(x, y).unwrap())
}

fn config(seed: u64, n: usize) -> Vec<HalfPlanePoint> {
    SampleGrid::default().random_points(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn is_psd(m: &bergkit::kernels::KernelMatrix) -> bool {
    psd_check(m, ThresholdPolicy::default()).unwrap().is_psd
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_lambda_matches_oracle(a in 0.2f64..5.0, b in 0.0f64..10.0) {
        let est = angular_derivative_estimate(&affine(a, b), &SampleGrid::default()).unwrap();
        let l = est.lambda_hat.unwrap();
        prop_assert!((l - 1.0 / a).abs() * a <= 1e-3);
    }

    #[test]
    fn lambda_is_multiplicative(a in 0.2f64..5.0, b in 0.0f64..5.0, c in 0.2f64..5.0, d in 0.0f64..5.0) {
        let outer = Symbol::affine(a, b);
        let inner = Symbol::affine(c, d);
        let phi = validate_self_map(&Symbol::compose(outer, inner), &SampleGrid::default()).unwrap();
        let l = angular_derivative_estimate(&phi, &SampleGrid::default()).unwrap().lambda_hat.unwrap();
        let want = 1.0 / (a * c);
        prop_assert!((l - want).abs() / want <= 1e-3);
    }

    #[test]
    fn refinement_never_decreases_sup(k in 3i32..6, j in 1i32..3, m in 2usize..5, pick in 0usize..3, p in 0.6f64..1.0) {
        let small = SampleGrid::new(1.0, 10f64.powi(k), k as usize * m + 1, 5, 1.0).unwrap();
        let large = SampleGrid::new(1.0, 10f64.powi(k + j), (k + j) as usize * 2 * m + 1, 5, 1.0).unwrap();
        let symbol = [Symbol::affine(2.0, 1.0), Symbol::power(p), Symbol::affine(0.5, 3.0)][pick].clone();
        let phi = validate_self_map(&symbol, &large).unwrap();
        let s = angular_derivative_estimate(&phi, &small).unwrap().sup_ratio;
        let l = angular_derivative_estimate(&phi, &large).unwrap().sup_ratio;
        prop_assert!(l >= s * (1.0 - 1e-12), "{l} < {s}");
    }

    #[test]
    fn kernels_are_conjugate_symmetric(alpha in -0.9f64..8.0, w in point(), z in point(), n in 1u32..9) {
        let wt = Weight::new(alpha).unwrap();
        let k1 = bergman_kernel(&wt, w, z);
        let k2 = bergman_kernel(&wt, z, w).conj();
        prop_assert!((k1 - k2).norm() <= 1e-12 * k1.norm());

        let phi = affine(2.0, 1.0);
        let k1 = kn_kernel(&phi, 0.5, n, w, z).unwrap();
        let k2 = kn_kernel(&phi, 0.5, n, z, w).unwrap().conj();
        prop_assert!((k1 - k2).norm() <= 1e-12 * k1.norm().max(1e-300));

        let m = nevanlinna_kernel(&AnalyticFn::rational(1.0, 0.0, 1.0), &[w, z]).unwrap();
        prop_assert!(m.hermitian_defect <= 1e-12 * m.entries.max_abs());
    }

    #[test]
    fn nevanlinna_matrices_are_psd(seed in any::<u64>()) {
        let pts = config(seed, 8);
        for psi in [
            AnalyticFn::identity(),
            AnalyticFn::constant(1.0),
            AnalyticFn::rational(1.0, 0.0, 1.0),
            AnalyticFn::rational(2.0, 3.0, 0.0),
        ] {
            prop_assert!(is_psd(&nevanlinna_kernel(&psi, &pts).unwrap()));
        }
    }

    #[test]
    fn kn_matrices_are_psd(seed in any::<u64>()) {
        let pts = config(seed, 8);
        let cases = [
            (Symbol::affine(1.0, 1.0), 1.0),
            (Symbol::affine(2.0, 1.0), 0.5),
            (Symbol::compose(Symbol::affine(2.0, 1.0), Symbol::affine(3.0, 0.0)), 1.0 / 6.0),
        ];
        for (s, lambda) in cases {
            let phi = validate_self_map(&s, &SampleGrid::default()).unwrap();
            for n in 0..=3u32 {
                prop_assert!(is_psd(&kn_matrix(&phi, lambda, 1 << n, &pts).unwrap()));
            }
        }
    }

    #[test]
    fn gram_matrices_are_psd(seed in any::<u64>(), alpha in -0.9f64..6.0) {
        let g = gram_matrix(&Weight::new(alpha).unwrap(), &config(seed, 8)).unwrap();
        prop_assert!(is_psd(&g.matrix));
    }

    #[test]
    fn laplace_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, b1 in 0.0f64..4.0, b2 in -0.5f64..4.0,
                         s1 in 0.1f64..5.0, s2 in 0.1f64..5.0, z in point()) {
        let f = HalfLineFunction::monomial(c1, b1, s1).unwrap();
        let g = HalfLineFunction::monomial(c2, b2, s2).unwrap();
        let sum = laplace_eval(&f.clone().plus(&g), z).unwrap();
        let parts = laplace_eval(&f, z).unwrap() + laplace_eval(&g, z).unwrap();
        prop_assert!((sum - parts).norm() <= 1e-12 * sum.norm().max(parts.norm()).max(1e-300));
    }

    #[test]
    fn laplace_maps_onto_kernels(alpha in -0.9f64..6.0, omega in point(), z in point()) {
        let w = Weight::new(alpha).unwrap();
        let c = w.norm_const() / gamma(2.0 + alpha);
        let f = HalfLineFunction::new(vec![Monomial::new(c.into(), 1.0 + alpha, omega.z().conj())]).unwrap();
        let got = laplace_eval(&f, z).unwrap();
        let want = bergman_kernel(&w, omega, z);
        prop_assert!((got - want).norm() <= 1e-12 * want.norm());
    }

    #[test]
    fn estimates_are_lower_bounds(a in 0.25f64..4.0, b in 0.0f64..6.0, alpha in -0.9f64..7.0) {
        let w = Weight::new(alpha).unwrap();
        let phi = affine(a, b);
        let theory = norm_theoretical(&w, 1.0 / a).unwrap();
        let kr = kernel_ratio_bound(&w, &phi, &SampleGrid::default()).unwrap();
        prop_assert!(kr.value <= theory + 1e-9);
        prop_assert!(kr.trace.iter().all(|t| t.value <= theory + 1e-9));
        let pts = SampleGrid::default().real_axis_points(12);
        let g = gram_norm_estimate(&w, &phi, &pts).unwrap();
        for (i, t) in g.trace.iter().enumerate() {
            prop_assert!(t.value <= theory * (1.0 + 1e-6), "{} > {theory}", t.value);
            if i > 0 {
                prop_assert!(t.value >= g.trace[i - 1].value - 1e-9);
            }
        }
    }
}

#[test]
fn interpolated_bound_holds_at_non_dyadic_weights() {
    for alpha in [0.3, 1.0, 1.7, 2.5, 3.3, 5.0, 9.1] {
        let w = Weight::new(alpha).unwrap();
        let d = bergkit::interp::interp_params(alpha).unwrap();
        assert!(!d.dyadic);
        for (a, b) in [(2.0, 1.0), (3.0, 0.0), (0.5, 2.0), (1.0, 5.0)] {
            let lambda: f64 = 1.0 / a;
            let interpolated =
                lambda.powf((2.0 + d.a) * (1.0 - d.theta) / 2.0) * lambda.powf((2.0 + d.b) * d.theta / 2.0);
            let kr = kernel_ratio_bound(&w, &affine(a, b), &SampleGrid::default()).unwrap();
            assert!(
                kr.value <= interpolated + 1e-9,
                "alpha={alpha} a={a}: {} > {interpolated}",
                kr.value
            );
        }
    }
}

#[test]
fn inner_products_are_hermitian_and_positive() {
    let q = QuadratureScheme::new(SchemeParams {
        n_x: 60,
        n_y: 160,
        y_max: 200.0,
    })
    .unwrap();
    let pt = |x, y| HalfPlanePoint::new(x, y).unwrap();
    for alpha in [0.0, 0.5, 2.0] {
        let w = Weight::new(alpha).unwrap();
        let f = KernelCombination::new(
            w,
            vec![
                (Complex64::new(1.0, 0.5), pt(1.0, 0.0)),
                (Complex64::new(-0.3, 0.0), pt(2.0, 1.0)),
            ],
        );
        let g = KernelCombination::new(w, vec![(Complex64::new(0.0, 1.0), pt(0.7, -1.5))]);
        let fg = inner_product(&w, |z| f.eval(z), |z| g.eval(z), &q).unwrap();
        let gf = inner_product(&w, |z| g.eval(z), |z| f.eval(z), &q).unwrap();
        assert!((fg.value - gf.value.conj()).norm() <= 1e-12 * fg.value.norm());
        let ff = inner_product(&w, |z| f.eval(z), |z| f.eval(z), &q).unwrap();
        assert!(ff.value.im.abs() <= 1e-12 * ff.value.re);
        assert!(ff.value.re >= -ff.error_estimate);
        assert!((ff.value.re - f.norm_sq()).abs() <= 1e-3 * f.norm_sq());
    }
}
