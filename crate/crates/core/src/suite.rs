//! The end-to-end check suite behind `bergkit report`.
//!
//! Each check returns a [`CheckResult`] whose fields depend only on the seed,
//! so two runs serialize identically apart from [`RunInfo`].

use crate::error::Result;
use crate::interp::{exponent_identity_check, interp_params, norm_rescaling_check};
use crate::kernels::{
    factorization_check, kn_matrix, nevanlinna_kernel, psd_check, seeded_configurations, AnalyticFn, ThresholdPolicy,
    Weight,
};
use crate::laplace::{isometry_check, HalfLineFunction, Monomial};
use crate::opnorm::{
    boundedness_verdict, essential_norm_lower_bound, gram_norm_estimate, kernel_ratio_bound, norm_theoretical,
    psd_boundedness_certificate, spectral_radius_estimate, Boundedness,
};
use crate::space::{reproducing_check, KernelCombination, QuadratureScheme, SchemeParams};
use crate::symbols::{angular_derivative_estimate, validate_self_map, HalfPlanePoint, SampleGrid, SelfMap, Symbol};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

/// `(a, b)` of the affine maps `z -> a z + b` used throughout.
pub const AFFINE_CASES: [(f64, f64); 4] = [(2.0, 1.0), (3.0, 0.0), (0.5, 2.0), (1.0, 5.0)];
pub const NORM_ALPHAS: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 2.7, 6.0];
pub const CERTIFICATE_ALPHAS: [f64; 3] = [0.0, 1.0, 2.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub grid: SampleGrid,
    pub quadrature: SchemeParams,
    /// Random configurations per PSD case.
    pub trials: usize,
    /// Points per random configuration.
    pub points: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid: SampleGrid::default(),
            quadrature: SchemeParams::default(),
            trials: 100,
            points: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub unix_time: u64,
    pub elapsed_ms: BTreeMap<String, u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
    /// Wall-clock data; excluded from determinism comparisons.
    pub run_info: Option<RunInfo>,
}

impl SuiteReport {
    /// JSON without `run_info`.
    pub fn deterministic_json(&self) -> String {
        let stripped = Self {
            run_info: None,
            ..self.clone()
        };
        serde_json::to_string_pretty(&stripped).expect("report serializes")
    }
}

struct Check {
    id: u32,
    name: &'static str,
    passed: bool,
    notes: Vec<String>,
    metrics: BTreeMap<String, f64>,
}

impl Check {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            passed: true,
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.passed = false;
            if self.notes.len() < 8 {
                self.notes.push(what());
            }
        }
    }

    fn max(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    }

    fn min(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(v);
    }

    fn error(&mut self, e: crate::error::BergError) {
        self.require(false, || format!("error: {e}"));
    }

    fn finish(self) -> CheckResult {
        let detail = if self.notes.is_empty() {
            "ok".to_string()
        } else {
            self.notes.join("; ")
        };
        CheckResult {
            id: self.id,
            name: self.name.to_string(),
            passed: self.passed,
            detail,
            metrics: self.metrics,
        }
    }
}

fn affine(a: f64, b: f64, grid: &SampleGrid) -> Result<SelfMap> {
    validate_self_map(&Symbol::affine(a, b), grid)
}

fn weight(alpha: f64) -> Weight {
    Weight::new(alpha).expect("suite weights exceed -1")
}

fn run<F: FnOnce(&mut Check) -> Result<()>>(id: u32, name: &'static str, f: F) -> CheckResult {
    let mut c = Check::new(id, name);
    if let Err(e) = f(&mut c) {
        c.error(e);
    }
    c.finish()
}

/// Kernel-ratio and Gram estimates against `lambda^{(2+alpha)/2}` for affine maps.
pub fn check_norm_formula(cfg: &SuiteConfig) -> CheckResult {
    run(1, "norm formula", |c| {
        let points = cfg.grid.real_axis_points(crate::opnorm::GRAM_POINTS);
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &cfg.grid)?;
            for alpha in NORM_ALPHAS {
                let w = weight(alpha);
                let theory = norm_theoretical(&w, 1.0 / a)?;
                for (name, est) in [
                    ("kernel_ratio", kernel_ratio_bound(&w, &phi, &cfg.grid)?.value),
                    ("gram_eig", gram_norm_estimate(&w, &phi, &points)?.value),
                ] {
                    let low = est / theory;
                    let excess = (est - theory) / theory;
                    c.min(&format!("{name}_min_fraction"), low);
                    c.max(&format!("{name}_max_excess"), excess);
                    c.require(low >= 0.99 && excess <= 1e-6, || {
                        format!("{name} a={a} b={b} alpha={alpha}: {est:.9e} vs {theory:.9e}")
                    });
                }
            }
        }
        Ok(())
    })
}

/// `norm_theoretical` at dyadic weights against `lambda^{2^{n-1}}` by repeated squaring.
pub fn check_dyadic(_cfg: &SuiteConfig) -> CheckResult {
    run(2, "dyadic consistency", |c| {
        for (alpha, n) in [(0.0, 1u32), (2.0, 2), (6.0, 3)] {
            for lambda in [1.0 / 3.0, 0.5, 2.0, 4.0] {
                let got = norm_theoretical(&weight(alpha), lambda)?;
                let want = (1..n).fold(lambda, |acc, _| acc * acc);
                let rel = (got - want).abs() / want;
                c.max("max_rel_diff", rel);
                c.require(rel <= 2.0 * f64::EPSILON, || {
                    format!("alpha={alpha} lambda={lambda}: {got:e} vs {want:e}")
                });
            }
        }
        Ok(())
    })
}

/// `sqrt(z)` is reported unbounded; constant maps are rejected.
pub fn check_unbounded(cfg: &SuiteConfig) -> CheckResult {
    run(3, "unboundedness", |c| {
        let grid = SampleGrid { r_max: 1e6, ..cfg.grid };
        let phi = validate_self_map(&Symbol::power(0.5), &grid)?;
        let report = boundedness_verdict(&weight(0.0), &phi, &grid)?;
        c.require(report.verdict == Boundedness::Unbounded, || {
            format!("verdict {:?}", report.verdict)
        });
        let est = angular_derivative_estimate(&phi, &grid)?;
        let monotone = est.trace.windows(2).all(|w| w[1].max_ratio >= w[0].max_ratio);
        c.require(monotone, || "trace not monotone".into());
        let last = est.trace.last().map_or(0.0, |s| s.max_ratio);
        c.metrics.insert("ratio_at_r_max".into(), last);
        c.require(last >= 1e3, || format!("ratio {last:e} at r=1e6"));
        let constant = validate_self_map(&Symbol::affine(0.0, 1.0), &grid);
        c.require(constant.is_err(), || "constant map accepted".into());
        Ok(())
    })
}

/// Nevanlinna and `K^{2^n}` matrices on seeded configurations.
pub fn check_kernel_positivity(cfg: &SuiteConfig) -> CheckResult {
    run(4, "kernel positivity", |c| {
        let configs = seeded_configurations(&cfg.grid, cfg.points, cfg.trials, cfg.seed);
        let policy = ThresholdPolicy::default();
        let mut tested = 0.0;
        let mut record = |c: &mut Check, label: &str, m: &crate::kernels::KernelMatrix| -> Result<()> {
            let v = psd_check(m, policy)?;
            let scale = (m.entries.trace().re / m.dim() as f64).max(1.0);
            c.min("min_eigenvalue_over_scale", v.min_eigenvalue / scale);
            c.require(v.is_psd, || format!("{label}: min eigenvalue {:e}", v.min_eigenvalue));
            tested += 1.0;
            Ok(())
        };
        for (label, psi) in [
            ("psi=z", AnalyticFn::identity()),
            ("psi=1", AnalyticFn::constant(1.0)),
            ("psi=z+1/z", AnalyticFn::rational(1.0, 0.0, 1.0)),
        ] {
            for pts in &configs {
                record(c, label, &nevanlinna_kernel(&psi, pts)?)?;
            }
        }
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &cfg.grid)?;
            for n in 0..=3u32 {
                for pts in &configs {
                    let label = format!("K^{} a={a} b={b}", 1u32 << n);
                    record(c, &label, &kn_matrix(&phi, 1.0 / a, 1 << n, pts)?)?;
                }
            }
        }
        c.metrics.insert("matrices".into(), tested);
        Ok(())
    })
}

/// `K^{2m} = K^m (K^m + 2 lambda^{-m})` at random pairs.
pub fn check_factorization(cfg: &SuiteConfig) -> CheckResult {
    run(5, "factorization identity", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(5));
        let pts = cfg.grid.random_points(2000, &mut rng);
        let pairs: Vec<_> = pts.chunks(2).map(|p| (p[0], p[1])).collect();
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &cfg.grid)?;
            for n in 0..=2 {
                let r = factorization_check(&phi, 1.0 / a, n, &pairs)?;
                c.max("max_rel_residual", r.max_rel);
                c.require(r.max_rel <= 1e-10, || format!("a={a} b={b} n={n}: {:e}", r.max_rel));
            }
        }
        Ok(())
    })
}

/// `lambda^{2+alpha} G - H` is PSD at the true `lambda` and not at `0.8 lambda` far out.
pub fn check_certificate(cfg: &SuiteConfig) -> CheckResult {
    run(6, "certificate sharpness", |c| {
        let trials = cfg.trials.clamp(1, 20);
        let mut configs = seeded_configurations(&cfg.grid, cfg.points, trials, cfg.seed.wrapping_add(6));
        configs.push(cfg.grid.real_axis_points(crate::opnorm::GRAM_POINTS));
        let far_grid = SampleGrid {
            r_min: cfg.grid.far_field_radius(),
            ..cfg.grid
        };
        let far = seeded_configurations(&far_grid, cfg.points, trials, cfg.seed.wrapping_add(60));
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &cfg.grid)?;
            for alpha in CERTIFICATE_ALPHAS {
                let w = weight(alpha);
                let lambda = 1.0 / a;
                for pts in &configs {
                    let v = psd_boundedness_certificate(&w, &phi, lambda, pts)?.verdict;
                    c.min("true_lambda_min_eigenvalue", v.min_eigenvalue);
                    c.require(v.is_psd, || {
                        format!("a={a} b={b} alpha={alpha}: not PSD at lambda ({:e})", v.min_eigenvalue)
                    });
                }
                for pts in &far {
                    let v = psd_boundedness_certificate(&w, &phi, 0.8 * lambda, pts)?.verdict;
                    c.max("reduced_lambda_min_eigenvalue", v.min_eigenvalue);
                    c.require(!v.is_psd, || format!("a={a} b={b} alpha={alpha}: PSD at 0.8 lambda"));
                }
            }
        }
        Ok(())
    })
}

fn random_point<R: Rng>(rng: &mut R) -> HalfPlanePoint {
    HalfPlanePoint::new(rng.gen_range(0.5..3.0), rng.gen_range(-2.0..2.0)).expect("positive real part")
}

/// Laplace isometry in closed form and by quadrature, plus the reproducing property.
pub fn check_laplace(cfg: &SuiteConfig) -> CheckResult {
    run(7, "laplace isometry", |c| {
        let q = QuadratureScheme::new(cfg.quadrature)?;
        let m = |c: f64, beta: f64, s: f64| Monomial::real(c, beta, s);
        let closed = [
            (0.0, HalfLineFunction::new(vec![m(1.0, 1.0, 1.0)])?),
            (1.0, HalfLineFunction::new(vec![m(1.0, 2.0, 2.0)])?),
            (
                2.5,
                HalfLineFunction::new(vec![
                    m(1.0, 3.5, 1.0),
                    Monomial::new(Complex64::new(2.0, -1.0), 3.5, Complex64::new(3.0, 1.0)),
                ])?,
            ),
        ];
        for (alpha, f) in &closed {
            let r = isometry_check(&weight(*alpha), f, &q)?;
            let gap = r.gap_closed.unwrap_or(f64::INFINITY);
            c.max("closed_gap", gap);
            c.require(gap <= 1e-10, || format!("closed alpha={alpha}: gap {gap:e}"));
        }
        let quad = [
            (0.0, HalfLineFunction::new(vec![m(1.0, 1.0, 1.0)])?),
            (0.0, HalfLineFunction::new(vec![m(1.0, 1.0, 2.0), m(1.0, 2.0, 2.0)])?),
            (1.0, HalfLineFunction::new(vec![m(1.0, 2.0, 1.0)])?),
        ];
        for (alpha, f) in &quad {
            let r = isometry_check(&weight(*alpha), f, &q)?;
            c.max("quadrature_gap", r.gap_quadrature);
            c.require(r.gap_quadrature <= 1e-3, || {
                format!("quadrature alpha={alpha}: gap {:e}", r.gap_quadrature)
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(7));
        for _ in 0..20 {
            let alpha = [0.0, 0.5, 1.0, 2.5][rng.gen_range(0..4)];
            let terms = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let coef = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                    (coef, random_point(&mut rng))
                })
                .collect();
            let f = KernelCombination::new(weight(alpha), terms);
            let omega = random_point(&mut rng);
            let r = reproducing_check(&f, omega, &q)?;
            let rel = r.residual / r.norm;
            c.max("reproducing_rel_residual", rel);
            c.require(rel <= 1e-3, || format!("reproducing alpha={alpha}: {rel:e}"));
        }
        Ok(())
    })
}

/// Interpolation weights, exponent identity and norm rescaling.
pub fn check_interpolation(cfg: &SuiteConfig) -> CheckResult {
    run(8, "interpolation algebra", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(8));
        let fs = [
            HalfLineFunction::monomial(1.0, 8.0, 1.0)?,
            HalfLineFunction::new(vec![Monomial::real(1.0, 8.0, 1.0), Monomial::real(0.5, 7.5, 2.0)])?,
        ];
        let small = HalfLineFunction::monomial(1.0, 2.0, 1.0)?;
        for _ in 0..1000 {
            let alpha = rng.gen_range(0.0..=14.0);
            let lambda = rng.gen_range(0.1..10.0);
            let d = interp_params(alpha)?;
            let drift = (d.interpolated_alpha() - alpha).abs();
            c.max("alpha_drift", drift);
            c.require(drift <= 1e-12, || format!("alpha={alpha}: drift {drift:e}"));
            let e = exponent_identity_check(&d, lambda)?;
            c.max("exponent_rel_residual", e.rel);
            c.require(e.rel <= 1e-12, || format!("alpha={alpha} lambda={lambda}: {:e}", e.rel));
            for f in fs.iter().chain((alpha < 4.0).then_some(&small)) {
                let r = norm_rescaling_check(&d, f)?;
                c.max("rescaling_rel_residual", r);
                c.require(r <= 1e-12, || format!("rescaling alpha={alpha}: {r:e}"));
            }
        }
        Ok(())
    })
}

/// Gelfand-formula estimate from eight iterates.
pub fn check_spectral_radius(cfg: &SuiteConfig) -> CheckResult {
    run(9, "spectral radius", |c| {
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &cfg.grid)?;
            for alpha in NORM_ALPHAS {
                let w = weight(alpha);
                let theory = norm_theoretical(&w, 1.0 / a)?;
                match spectral_radius_estimate(&w, &phi, 8, &cfg.grid) {
                    Ok(s) => {
                        let rel = (s.estimate - theory).abs() / theory;
                        c.max("max_rel_gap", rel);
                        c.require(rel <= 0.02, || {
                            format!("a={a} b={b} alpha={alpha}: {:e} vs {theory:e}", s.estimate)
                        });
                    }
                    Err(e) => c.require(false, || format!("a={a} b={b} alpha={alpha}: {e}")),
                }
            }
        }
        Ok(())
    })
}

/// Far-field lower bound for the essential norm with `r_max = 1e8`.
pub fn check_essential_norm(cfg: &SuiteConfig) -> CheckResult {
    run(10, "essential norm", |c| {
        let grid = SampleGrid { r_max: 1e8, ..cfg.grid };
        for (a, b) in AFFINE_CASES {
            let phi = affine(a, b, &grid)?;
            for alpha in NORM_ALPHAS {
                let w = weight(alpha);
                let theory = norm_theoretical(&w, 1.0 / a)?;
                let e = essential_norm_lower_bound(&w, &phi, &grid)?;
                let frac = e.lower_bound / theory;
                c.min("min_fraction", frac);
                c.require(frac >= 0.98 && e.lower_bound > 0.0, || {
                    format!("a={a} b={b} alpha={alpha}: {:e} vs {theory:e}", e.lower_bound)
                });
            }
        }
        Ok(())
    })
}

type CheckFn = fn(&SuiteConfig) -> CheckResult;

pub const CHECKS: [(CheckFn, Option<Duration>); 10] = [
    (check_norm_formula, Some(Duration::from_secs(10))),
    (check_dyadic, None),
    (check_unbounded, Some(Duration::from_secs(1))),
    (check_kernel_positivity, None),
    (check_factorization, None),
    (check_certificate, None),
    (check_laplace, None),
    (check_interpolation, None),
    (check_spectral_radius, None),
    (check_essential_norm, None),
];

/// Runs one check, enforcing its time budget when it has one.
pub fn timed(f: CheckFn, budget: Option<Duration>, cfg: &SuiteConfig) -> (CheckResult, Duration) {
    let start = Instant::now();
    let mut r = f(cfg);
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            r.passed = false;
            let note = format!("took {elapsed:?}, budget {b:?}");
            r.detail = if r.detail == "ok" {
                note
            } else {
                format!("{}; {note}", r.detail)
            };
        }
    }
    (r, elapsed)
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut checks = Vec::with_capacity(CHECKS.len());
    let mut elapsed_ms = BTreeMap::new();
    for (f, budget) in CHECKS {
        let (r, t) = timed(f, budget, cfg);
        elapsed_ms.insert(format!("{:02}", r.id), t.as_millis());
        checks.push(r);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    SuiteReport {
        config: *cfg,
        failed: checks.len() - passed,
        all_passed: passed == checks.len(),
        passed,
        checks,
        run_info: Some(RunInfo {
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            elapsed_ms,
        }),
    }
}
