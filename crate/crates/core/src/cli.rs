//! Command-line front end. Every subcommand writes one JSON document (or a
//! CSV table) to `--out` or stdout; identical flags and seed give identical
//! bytes, except the `run_info` field of `report`.
//!
//! Exit codes: 0 success, 1 configuration error or failed report check,
//! 2 unbounded symbol under `--require-bounded`.

use crate::error::{BergError, Result};
use crate::interp::{exponent_identity_check, interp_params, ExponentResidual, InterpolationData};
use crate::kernels::{
    gram_matrix, kn_matrix, nevanlinna_kernel, psd_check, seeded_configurations, AnalyticFn, KernelMatrix,
    ThresholdPolicy, Weight,
};
use crate::laplace::{isometry_check, HalfLineFunction, IsometryReport, Monomial};
use crate::opnorm::{
    boundedness_verdict, essential_norm_lower_bound, norm_theoretical, spectral_radius_estimate, Boundedness,
    EstimateReport, SpectralRadiusEstimate,
};
use crate::space::{QuadratureScheme, SchemeParams};
use crate::suite::{run_suite, SuiteConfig};
use crate::symbols::{angular_derivative_estimate, validate_self_map, AngularDerivativeEstimate, SampleGrid, Symbol};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNBOUNDED: i32 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "bergkit",
    version,
    about = "Composition operators on weighted Bergman spaces of the half-plane"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm estimates against lambda^{(2+alpha)/2}.
    Norm(NormArgs),
    /// PSD verdicts for kernel matrices on seeded random configurations.
    Psd(PsdArgs),
    /// Angular-derivative estimates with their shell traces.
    Angular(CommonArgs),
    /// Laplace isometry for f(t) given as an expression or JSON.
    Laplace(LaplaceArgs),
    /// Dyadic bracketing and interpolation constants.
    Interp(InterpArgs),
    /// Spectral radius and essential-norm estimates.
    Spectral(SpectralArgs),
    /// Full check suite as one JSON summary.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Symbol, e.g. `affine:2,1`, `power:0.5`, `compose:(affine:2,0;power:1/2)`.
    #[arg(long = "symbol")]
    pub symbols: Vec<String>,
    #[arg(long = "alpha", allow_hyphen_values = true)]
    pub alphas: Vec<f64>,
    /// `r_min,r_max,shells,angles,aperture`
    #[arg(long)]
    pub grid: Option<String>,
    /// `n_x,n_y,y_max`
    #[arg(long)]
    pub quadrature: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Exit with code 2 if any symbol is reported unbounded.
    #[arg(long)]
    pub require_bounded: bool,
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `K:m`, `gram` or `nevanlinna:a,b,c` for psi(z) = a z + b + c/z.
    #[arg(long, default_value = "gram")]
    pub kernel: String,
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Lambda for `K:m`; defaults to the symbol's exact or estimated value.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LaplaceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `t*exp(-t)`, `(t+t^2)*exp(-2*t)`, or a JSON list of `{c, beta, s}` terms.
    #[arg(long = "f")]
    pub f: String,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lambda for the exponent identity.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 8)]
    pub iterations: usize,
}

/// Resolved configuration shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub symbols: Vec<Symbol>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub grid: SampleGrid,
    #[serde(default)]
    pub quadrature: SchemeParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Format,
    #[serde(default)]
    pub out_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            symbols: Vec::new(),
            alphas: Vec::new(),
            grid: SampleGrid::default(),
            quadrature: SchemeParams::default(),
            seed: 0,
            output: Format::Json,
            out_path: None,
        }
    }
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| BergError::Parse(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| BergError::Parse(format!("{}: {e}", path.display())))?
            }
            None => Self::default(),
        };
        if !args.symbols.is_empty() {
            cfg.symbols = args.symbols.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if !args.alphas.is_empty() {
            cfg.alphas = args.alphas.clone();
        }
        if let Some(g) = &args.grid {
            cfg.grid = parse_grid(g)?;
        }
        if let Some(q) = &args.quadrature {
            cfg.quadrature = parse_quadrature(q)?;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(f) = args.format {
            cfg.output = f;
        }
        if args.out.is_some() {
            cfg.out_path = args.out.clone();
        }
        if cfg.alphas.is_empty() {
            cfg.alphas.push(0.0);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        QuadratureScheme::new(self.quadrature)?;
        for &a in &self.alphas {
            Weight::new(a)?;
        }
        for s in &self.symbols {
            validate_self_map(s, &self.grid)?;
        }
        Ok(())
    }

    fn weights(&self) -> Vec<Weight> {
        self.alphas
            .iter()
            .map(|&a| Weight::new(a).expect("validated"))
            .collect()
    }

    fn require_symbols(&self) -> Result<()> {
        if self.symbols.is_empty() {
            return Err(BergError::Parse("at least one --symbol is required".into()));
        }
        Ok(())
    }

    /// `(symbol, alpha)` cells in configuration order.
    fn cells(&self) -> Vec<(Symbol, Weight)> {
        self.symbols
            .iter()
            .flat_map(|s| self.weights().into_iter().map(move |w| (s.clone(), w)))
            .collect()
    }
}

fn numbers(text: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let v = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| BergError::Parse(format!("{what} `{text}`: {e}")))?;
    if v.len() != expected {
        return Err(BergError::Parse(format!(
            "{what} `{text}`: expected {expected} numbers"
        )));
    }
    Ok(v)
}

fn count(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(BergError::Parse(format!("{what} must be a positive integer, got {v}")))
    }
}

pub fn parse_grid(text: &str) -> Result<SampleGrid> {
    let v = numbers(text, 5, "grid")?;
    SampleGrid::new(v[0], v[1], count(v[2], "shells")?, count(v[3], "angles")?, v[4])
}

pub fn parse_quadrature(text: &str) -> Result<SchemeParams> {
    let v = numbers(text, 3, "quadrature")?;
    Ok(SchemeParams {
        n_x: count(v[0], "n_x")?,
        n_y: count(v[1], "n_y")?,
        y_max: v[2],
    })
}

/// Parses `f(t)` as a sum of products of numbers, `t^p` and `exp(-s*t)`.
/// A leading `[` selects the JSON form.
pub fn parse_half_line_function(text: &str) -> Result<HalfLineFunction> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| BergError::Parse(format!("f: {e}")));
    }
    let mut p = ExprParser {
        src: trimmed.as_bytes(),
        pos: 0,
    };
    let terms = p.expression()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected input"));
    }
    HalfLineFunction::new(terms)
}

/// Terms are monomials `c t^beta e^{-s t}`; plain numbers and powers of `t`
/// carry `s = 0` until multiplied by an exponential.
struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, msg: &str) -> BergError {
        BergError::Parse(format!("f at byte {}: {msg}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expression(&mut self) -> Result<Vec<Monomial>> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc.extend(self.term()?);
            } else if self.eat(b'-') {
                acc.extend(negate(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Vec<Monomial>> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = multiply(&acc, &self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Vec<Monomial>> {
        if self.eat(b'-') {
            return Ok(negate(self.factor()?));
        }
        if self.eat(b'(') {
            let e = self.expression()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        let rest = &self.src[self.pos..];
        if rest.starts_with(b"exp(") {
            self.pos += 4;
            let arg = self.expression()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            let mut s = Complex64::new(0.0, 0.0);
            for m in &arg {
                if m.beta != 1.0 || m.s != Complex64::new(0.0, 0.0) {
                    return Err(self.error("exp argument must be linear in t"));
                }
                s -= m.c;
            }
            return Ok(vec![Monomial::new(1.0.into(), 0.0, s)]);
        }
        if self.eat(b't') {
            let beta = if self.eat(b'^') { self.number()? } else { 1.0 };
            return Ok(vec![Monomial::real(1.0, beta, 0.0)]);
        }
        let c = self.number()?;
        Ok(vec![Monomial::real(c, 0.0, 0.0)])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.eat(b'(') {
            let v = self.number_literal()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(v);
        }
        self.number_literal()
    }

    fn number_literal(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && self.src[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exponent_sign = (c == b'-' || c == b'+') && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exponent_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                self.pos = start;
                self.error("expected a number, `t`, `exp(` or `(`")
            })
    }
}

fn negate(terms: Vec<Monomial>) -> Vec<Monomial> {
    terms.into_iter().map(|m| Monomial::new(-m.c, m.beta, m.s)).collect()
}

fn multiply(a: &[Monomial], b: &[Monomial]) -> Vec<Monomial> {
    a.iter()
        .flat_map(|x| {
            b.iter()
                .map(move |y| Monomial::new(x.c * y.c, x.beta + y.beta, x.s + y.s))
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:e}"))
}

fn rel_gap(value: Option<f64>, reference: Option<f64>) -> Option<f64> {
    match (value, reference) {
        (Some(v), Some(r)) if r != 0.0 => Some((v - r).abs() / r),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub symbol: String,
    pub descriptor: Symbol,
    pub alpha: f64,
    pub verdict: Boundedness,
    pub lambda_hat: Option<f64>,
    pub theoretical: Option<f64>,
    pub kernel_ratio: f64,
    pub gram_eig: Option<f64>,
    pub gap_kernel_ratio: Option<f64>,
    pub gap_gram: Option<f64>,
    pub spectral_radius: Option<f64>,
    pub essential_lower_bound: Option<f64>,
    pub estimates: Vec<EstimateReport>,
}

pub const NORM_CSV_HEADER: &str =
    "symbol,alpha,verdict,lambda_hat,theoretical,kernel_ratio,gram_eig,gap_kernel_ratio,gap_gram";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub config: RunConfig,
    pub rows: Vec<NormRow>,
}

pub fn cmd_norm(cfg: &RunConfig) -> Result<NormTable> {
    cfg.require_symbols()?;
    let rows = cfg
        .cells()
        .par_iter()
        .map(|(symbol, w)| {
            let phi = validate_self_map(symbol, &cfg.grid)?;
            let r = boundedness_verdict(w, &phi, &cfg.grid)?;
            let mut estimates = vec![EstimateReport::from_estimate(
                &r.kernel_ratio,
                r.theoretical,
                Some(cfg.seed),
            )];
            if let Some(g) = &r.gram {
                estimates.push(EstimateReport::from_estimate(g, r.theoretical, Some(cfg.seed)));
            }
            let gram_eig = r.gram.as_ref().map(|g| g.value);
            Ok(NormRow {
                symbol: symbol.to_string(),
                descriptor: symbol.clone(),
                alpha: w.alpha(),
                verdict: r.verdict,
                lambda_hat: r.lambda_hat,
                theoretical: r.theoretical,
                kernel_ratio: r.kernel_ratio.value,
                gram_eig,
                gap_kernel_ratio: rel_gap(Some(r.kernel_ratio.value), r.theoretical),
                gap_gram: rel_gap(gram_eig, r.theoretical),
                spectral_radius: r.spectral_radius,
                essential_lower_bound: r.essential_lower_bound,
                estimates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormTable {
        config: cfg.clone(),
        rows,
    })
}

fn norm_csv(t: &NormTable) -> String {
    let mut out = format!("{NORM_CSV_HEADER}\n");
    for r in &t.rows {
        out.push_str(&format!(
            "\"{}\",{},{},{},{},{:e},{},{},{}\n",
            r.symbol,
            r.alpha,
            serde_json::to_value(r.verdict)
                .expect("enum")
                .as_str()
                .unwrap_or_default(),
            opt(r.lambda_hat),
            opt(r.theoretical),
            r.kernel_ratio,
            opt(r.gram_eig),
            opt(r.gap_kernel_ratio),
            opt(r.gap_gram),
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdTrial {
    pub trial: usize,
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub is_psd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdRun {
    pub kernel: String,
    pub symbol: Option<String>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub points: usize,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub trials: Vec<PsdTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdTable {
    pub config: RunConfig,
    pub runs: Vec<PsdRun>,
}

enum KernelChoice {
    Kn(u32),
    Gram,
    Nevanlinna(AnalyticFn),
}

fn parse_kernel(text: &str) -> Result<KernelChoice> {
    let bad = || BergError::Parse(format!("kernel `{text}`: expected K:m, gram or nevanlinna:a,b,c"));
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    match head.trim() {
        "K" | "k" => rest
            .trim()
            .parse::<u32>()
            .ok()
            .filter(|m| *m >= 1)
            .map(KernelChoice::Kn)
            .ok_or_else(bad),
        "gram" if rest.is_empty() => Ok(KernelChoice::Gram),
        "nevanlinna" => {
            let v = numbers(rest, 3, "nevanlinna")?;
            Ok(KernelChoice::Nevanlinna(AnalyticFn::rational(v[0], v[1], v[2])))
        }
        _ => Err(bad()),
    }
}

pub fn cmd_psd(cfg: &RunConfig, args: &PsdArgs) -> Result<PsdTable> {
    let kernel = parse_kernel(&args.kernel)?;
    if args.points == 0 || args.trials == 0 {
        return Err(BergError::Parse("--points and --trials must be positive".into()));
    }
    let configs = seeded_configurations(&cfg.grid, args.points, args.trials, cfg.seed);
    let policy = ThresholdPolicy::default();
    let evaluate =
        |build: &dyn Fn(&[crate::symbols::HalfPlanePoint]) -> Result<KernelMatrix>| -> Result<Vec<PsdTrial>> {
            configs
                .iter()
                .enumerate()
                .map(|(trial, pts)| {
                    let v = psd_check(&build(pts)?, policy)?;
                    Ok(PsdTrial {
                        trial,
                        min_eigenvalue: v.min_eigenvalue,
                        threshold: v.threshold,
                        is_psd: v.is_psd,
                    })
                })
                .collect()
        };
    let finish = |symbol: Option<String>, alpha, lambda, trials: Vec<PsdTrial>| {
        let passed = trials.iter().filter(|t| t.is_psd).count();
        PsdRun {
            kernel: args.kernel.clone(),
            symbol,
            alpha,
            lambda,
            points: args.points,
            seed: cfg.seed,
            passed,
            failed: trials.len() - passed,
            trials,
        }
    };
    let mut runs = Vec::new();
    match kernel {
        KernelChoice::Kn(m) => {
            cfg.require_symbols()?;
            for s in &cfg.symbols {
                let phi = validate_self_map(s, &cfg.grid)?;
                let lambda = match args.lambda.or(phi.known_lambda()) {
                    Some(l) => l,
                    None => angular_derivative_estimate(&phi, &cfg.grid)?
                        .lambda_hat
                        .ok_or_else(|| BergError::InvalidSymbol(format!("no finite lambda for {s}")))?,
                };
                let trials = evaluate(&|pts| kn_matrix(&phi, lambda, m, pts))?;
                runs.push(finish(Some(s.to_string()), None, Some(lambda), trials));
            }
        }
        KernelChoice::Gram => {
            for w in cfg.weights() {
                let trials = evaluate(&|pts| Ok(gram_matrix(&w, pts)?.matrix))?;
                runs.push(finish(None, Some(w.alpha()), None, trials));
            }
        }
        KernelChoice::Nevanlinna(psi) => {
            let trials = evaluate(&|pts| nevanlinna_kernel(&psi, pts))?;
            runs.push(finish(None, None, None, trials));
        }
    }
    Ok(PsdTable {
        config: cfg.clone(),
        runs,
    })
}

fn psd_csv(t: &PsdTable) -> String {
    let mut out = String::from("kernel,symbol,alpha,lambda,trial,min_eigenvalue,threshold,is_psd\n");
    for r in &t.runs {
        for tr in &r.trials {
            out.push_str(&format!(
                "{},\"{}\",{},{},{},{:e},{:e},{}\n",
                r.kernel,
                r.symbol.as_deref().unwrap_or(""),
                opt(r.alpha),
                opt(r.lambda),
                tr.trial,
                tr.min_eigenvalue,
                tr.threshold,
                tr.is_psd
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularRow {
    pub symbol: String,
    pub estimate: AngularDerivativeEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularTable {
    pub config: RunConfig,
    pub rows: Vec<AngularRow>,
}

pub fn cmd_angular(cfg: &RunConfig) -> Result<AngularTable> {
    cfg.require_symbols()?;
    let rows = cfg
        .symbols
        .par_iter()
        .map(|s| {
            let phi = validate_self_map(s, &cfg.grid)?;
            Ok(AngularRow {
                symbol: s.to_string(),
                estimate: angular_derivative_estimate(&phi, &cfg.grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngularTable {
        config: cfg.clone(),
        rows,
    })
}

fn angular_csv(t: &AngularTable) -> String {
    let mut out = String::from("symbol,radius,max_ratio,verdict,lambda_hat\n");
    for r in &t.rows {
        let verdict = serde_json::to_value(r.estimate.verdict).expect("enum");
        for s in &r.estimate.trace {
            out.push_str(&format!(
                "\"{}\",{:e},{:e},{},{}\n",
                r.symbol,
                s.radius,
                s.max_ratio,
                verdict.as_str().unwrap_or_default(),
                opt(r.estimate.lambda_hat)
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceRow {
    pub alpha: f64,
    pub report: IsometryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceTable {
    pub config: RunConfig,
    pub f: HalfLineFunction,
    pub rows: Vec<LaplaceRow>,
}

pub fn cmd_laplace(cfg: &RunConfig, f: &str) -> Result<LaplaceTable> {
    let f = parse_half_line_function(f)?;
    let q = QuadratureScheme::new(cfg.quadrature)?;
    let rows = cfg
        .weights()
        .iter()
        .map(|w| {
            Ok(LaplaceRow {
                alpha: w.alpha(),
                report: isometry_check(w, &f, &q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LaplaceTable {
        config: cfg.clone(),
        f,
        rows,
    })
}

fn laplace_csv(t: &LaplaceTable) -> String {
    let mut out = String::from("alpha,lhs_quadrature,lhs_quadrature_error,lhs_closed,rhs,gap_quadrature,gap_closed\n");
    for r in &t.rows {
        let p = &r.report;
        out.push_str(&format!(
            "{},{:e},{:e},{},{:e},{:e},{}\n",
            r.alpha,
            p.lhs_quadrature,
            p.lhs_quadrature_error,
            opt(p.lhs_closed),
            p.rhs,
            p.gap_quadrature,
            opt(p.gap_closed)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpRow {
    pub data: InterpolationData,
    pub exponent_identity: ExponentResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpTable {
    pub config: RunConfig,
    pub lambda: f64,
    pub rows: Vec<InterpRow>,
}

pub fn cmd_interp(cfg: &RunConfig, lambda: f64) -> Result<InterpTable> {
    let rows = cfg
        .alphas
        .iter()
        .map(|&a| {
            let data = interp_params(a)?;
            Ok(InterpRow {
                exponent_identity: exponent_identity_check(&data, lambda)?,
                data,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpTable {
        config: cfg.clone(),
        lambda,
        rows,
    })
}

fn interp_csv(t: &InterpTable) -> String {
    let mut out = String::from(
        "alpha,n,A,B,theta,weight_const_dw,weight_const_mu,ratio,dyadic,hardy_endpoint,exponent_residual\n",
    );
    for r in &t.rows {
        let d = &r.data;
        out.push_str(&format!(
            "{},{},{},{},{},{},{:e},{},{},{},{:e}\n",
            d.alpha,
            d.n,
            d.a,
            d.b,
            d.theta,
            opt(d.weight_const_dw),
            d.weight_const_mu,
            opt(d.ratio),
            d.dyadic,
            d.hardy_endpoint,
            r.exponent_identity.abs
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub symbol: String,
    pub alpha: f64,
    pub theoretical: Option<f64>,
    pub spectral: Option<SpectralRadiusEstimate>,
    /// Set when an iterate's coefficients overflowed.
    pub overflow_at: Option<usize>,
    pub essential_lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTable {
    pub config: RunConfig,
    pub iterations: usize,
    pub rows: Vec<SpectralRow>,
}

pub fn cmd_spectral(cfg: &RunConfig, iterations: usize) -> Result<SpectralTable> {
    cfg.require_symbols()?;
    let rows = cfg
        .cells()
        .par_iter()
        .map(|(s, w)| {
            let phi = validate_self_map(s, &cfg.grid)?;
            let (spectral, overflow_at) = match spectral_radius_estimate(w, &phi, iterations, &cfg.grid) {
                Ok(r) => (Some(r), None),
                Err(BergError::Overflow(n)) => (None, Some(n)),
                Err(e) => return Err(e),
            };
            let lambda = match phi.known_lambda() {
                Some(l) => Some(l),
                None => angular_derivative_estimate(&phi, &cfg.grid)?.lambda_hat,
            };
            Ok(SpectralRow {
                symbol: s.to_string(),
                alpha: w.alpha(),
                theoretical: lambda.map(|l| norm_theoretical(w, l)).transpose()?,
                spectral,
                overflow_at,
                essential_lower_bound: essential_norm_lower_bound(w, &phi, &cfg.grid)?.lower_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralTable {
        config: cfg.clone(),
        iterations,
        rows,
    })
}

fn spectral_csv(t: &SpectralTable) -> String {
    let mut out = String::from("symbol,alpha,theoretical,spectral_radius,overflow_at,essential_lower_bound\n");
    for r in &t.rows {
        out.push_str(&format!(
            "\"{}\",{},{},{},{},{:e}\n",
            r.symbol,
            r.alpha,
            opt(r.theoretical),
            opt(r.spectral.as_ref().map(|s| s.estimate)),
            r.overflow_at.map_or_else(String::new, |n| n.to_string()),
            r.essential_lower_bound
        ));
    }
    out
}

pub fn cmd_report(cfg: &RunConfig) -> crate::suite::SuiteReport {
    run_suite(&SuiteConfig {
        seed: cfg.seed,
        grid: cfg.grid,
        quadrature: cfg.quadrature,
        ..SuiteConfig::default()
    })
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("outputs serialize");
    s.push('\n');
    s
}

fn emit(cfg: &RunConfig, body: &str, stdout: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| BergError::Parse(format!("write failed: {e}"));
    match &cfg.out_path {
        Some(path) => std::fs::write(path, body).map_err(io),
        None => stdout.write_all(body.as_bytes()).map_err(io),
    }
}

/// Runs one parsed command; returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Norm(a) => {
            let cfg = RunConfig::from_args(&a.common)?;
            let t = cmd_norm(&cfg)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => norm_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            let unbounded = t.rows.iter().any(|r| r.verdict == Boundedness::Unbounded);
            Ok(if a.require_bounded && unbounded {
                EXIT_UNBOUNDED
            } else {
                EXIT_OK
            })
        }
        Command::Psd(a) => {
            let cfg = RunConfig::from_args(&a.common)?;
            let t = cmd_psd(&cfg, a)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => psd_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Angular(a) => {
            let cfg = RunConfig::from_args(a)?;
            let t = cmd_angular(&cfg)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => angular_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Laplace(a) => {
            let cfg = RunConfig::from_args(&a.common)?;
            let t = cmd_laplace(&cfg, &a.f)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => laplace_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Interp(a) => {
            let cfg = RunConfig::from_args(&a.common)?;
            let t = cmd_interp(&cfg, a.lambda)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => interp_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Spectral(a) => {
            let cfg = RunConfig::from_args(&a.common)?;
            let t = cmd_spectral(&cfg, a.iterations)?;
            let body = match cfg.output {
                Format::Json => json(&t),
                Format::Csv => spectral_csv(&t),
            };
            emit(&cfg, &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Report(a) => {
            let cfg = RunConfig::from_args(a)?;
            let r = cmd_report(&cfg);
            let body = match cfg.output {
                Format::Json => json(&r),
                Format::Csv => {
                    let mut s = String::from("id,name,passed,detail\n");
                    for c in &r.checks {
                        s.push_str(&format!(
                            "{},{},{},\"{}\"\n",
                            c.id,
                            c.name,
                            c.passed,
                            c.detail.replace('"', "'")
                        ));
                    }
                    s
                }
            };
            emit(&cfg, &body, stdout)?;
            Ok(if r.all_passed { EXIT_OK } else { EXIT_CONFIG })
        }
    }
}

/// Sizes the global thread pool from `BERGKIT_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BERGKIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| BergError::Parse(format!("BERGKIT_THREADS `{v}` is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| BergError::Parse(format!("thread pool: {e}")))?;
    }
    Ok(())
}
