//! Holomorphic self-maps of the right half-plane drawn from closed-form
//! families, their validation, composition and evaluation.

mod angular;
mod grid;
mod syntax;

pub use angular::{angular_derivative_estimate, AngularDerivativeEstimate, ShellRatio, Verdict};
pub use grid::{SampleGrid, Shell, Spacing};

use crate::error::{BergError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

/// A point of the right half-plane `{Re z > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct HalfPlanePoint(Complex64);

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::try_from(Complex64::new(re, im))
    }

    /// Real point `x > 0`.
    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::try_from(Complex64::from_polar(r, theta))
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn re(&self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn im(&self) -> f64 {
        self.0.im
    }
}

impl TryFrom<Complex64> for HalfPlanePoint {
    type Error = BergError;

    fn try_from(z: Complex64) -> Result<Self> {
        if z.re > 0.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(Self(z))
        } else {
            Err(BergError::NotInHalfPlane { re: z.re, im: z.im })
        }
    }
}

impl From<HalfPlanePoint> for Complex64 {
    fn from(p: HalfPlanePoint) -> Self {
        p.0
    }
}

impl fmt::Display for HalfPlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Moebius self-map of the unit disc `zeta -> (a zeta + b) / (c zeta + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl DiscMap {
    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn apply(&self, zeta: Complex64) -> Complex64 {
        (self.a * zeta + self.b) / (self.c * zeta + self.d)
    }

    /// Coefficients of `tau o psi o tau^{-1}` with `tau(zeta) = (1 + zeta) / (1 - zeta)`.
    pub fn half_plane_coefficients(&self) -> [Complex64; 4] {
        // tau = [[1, 1], [-1, 1]], tau^{-1} ~ [[1, -1], [1, 1]]
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let (p, q, r, s) = (a + c, b + d, c - a, d - b);
        [p + q, q - p, r + s, s - r]
    }
}

/// Cayley map `tau(zeta) = (1 + zeta) / (1 - zeta)` from the disc onto the half-plane.
pub fn cayley(zeta: Complex64) -> Complex64 {
    (1.0 + zeta) / (1.0 - zeta)
}

/// Inverse Cayley map from the half-plane onto the disc.
pub fn cayley_inverse(z: Complex64) -> Complex64 {
    (z - 1.0) / (z + 1.0)
}

/// Closed-form holomorphic maps of the half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Symbol {
    /// `a z + b`
    Affine { a: f64, b: Complex64 },
    /// `(a z + b) / (c z + d)`
    Moebius {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    /// Principal power `z^p`.
    Power { p: f64 },
    /// Half-plane conjugate of a disc map.
    Cayley { disc: DiscMap },
    /// `left(right(z))`
    Compose { left: Box<Symbol>, right: Box<Symbol> },
}

impl Symbol {
    pub fn identity() -> Self {
        Symbol::Affine {
            a: 1.0,
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Symbol::Affine { a, b: b.into() }
    }

    pub fn power(p: f64) -> Self {
        Symbol::Power { p }
    }

    pub fn compose(left: Symbol, right: Symbol) -> Self {
        Symbol::Compose {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Raw evaluation, no domain checks.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Affine { a, b } => *a * z + b,
            Symbol::Moebius { a, b, c, d } => (a * z + b) / (c * z + d),
            Symbol::Power { p } => crate::numeric::cpow(z, *p),
            Symbol::Cayley { disc } => {
                let [a, b, c, d] = disc.half_plane_coefficients();
                (a * z + b) / (c * z + d)
            }
            Symbol::Compose { left, right } => left.apply(right.apply(z)),
        }
    }

    /// Angular derivative at infinity when the family provides it in closed form.
    pub fn known_lambda(&self) -> Option<f64> {
        match self {
            Symbol::Affine { a, .. } => Some(1.0 / a),
            Symbol::Moebius { a, c, d, .. } => moebius_lambda(*a, *c, *d),
            Symbol::Power { p } => (*p == 1.0).then_some(1.0),
            Symbol::Cayley { disc } => {
                let [a, _, c, d] = disc.half_plane_coefficients();
                moebius_lambda(a, c, d)
            }
            Symbol::Compose { left, right } => Some(left.known_lambda()? * right.known_lambda()?),
        }
    }

    /// Composition `self o inner`, collapsed inside a closed family when possible.
    pub fn then_inner(&self, inner: &Symbol) -> Symbol {
        match (self, inner) {
            (Symbol::Affine { a: a1, b: b1 }, Symbol::Affine { a: a2, b: b2 }) => Symbol::Affine {
                a: a1 * a2,
                b: *a1 * b2 + b1,
            },
            (Symbol::Power { p: p1 }, Symbol::Power { p: p2 }) => Symbol::Power { p: p1 * p2 },
            (outer, inner) => match (outer.moebius_coefficients(), inner.moebius_coefficients()) {
                (Some(m1), Some(m2)) => {
                    let [a, b, c, d] = normalize(mat_mul(m1, m2));
                    Symbol::Moebius { a, b, c, d }
                }
                _ => Symbol::compose(outer.clone(), inner.clone()),
            },
        }
    }

    fn moebius_coefficients(&self) -> Option<[Complex64; 4]> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Symbol::Affine { a, b } => Some([(*a).into(), *b, zero, one]),
            Symbol::Moebius { a, b, c, d } => Some([*a, *b, *c, *d]),
            Symbol::Cayley { disc } => Some(disc.half_plane_coefficients()),
            _ => None,
        }
    }

    /// Largest coefficient magnitude, used by the overflow guard on iterates.
    pub fn coefficient_scale(&self) -> f64 {
        match self {
            Symbol::Affine { a, b } => a.abs().max(b.norm()),
            Symbol::Moebius { a, b, c, d } => [a, b, c, d].iter().map(|v| v.norm()).fold(0.0, f64::max),
            Symbol::Power { p } => p.abs(),
            Symbol::Cayley { disc } => disc
                .half_plane_coefficients()
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max),
            Symbol::Compose { left, right } => left.coefficient_scale().max(right.coefficient_scale()),
        }
    }
}

fn moebius_lambda(a: Complex64, c: Complex64, d: Complex64) -> Option<f64> {
    if c.norm() != 0.0 || a.norm() == 0.0 {
        return None;
    }
    let ratio = d / a;
    (ratio.re > 0.0 && ratio.im.abs() <= 1e-14 * ratio.re).then_some(ratio.re)
}

fn mat_mul(m: [Complex64; 4], n: [Complex64; 4]) -> [Complex64; 4] {
    [
        m[0] * n[0] + m[1] * n[2],
        m[0] * n[1] + m[1] * n[3],
        m[2] * n[0] + m[3] * n[2],
        m[2] * n[1] + m[3] * n[3],
    ]
}

// Scale so that d = 1 when possible; keeps iterated coefficients comparable.
fn normalize(m: [Complex64; 4]) -> [Complex64; 4] {
    let s = if m[3].norm() > 0.0 { m[3] } else { m[2] };
    if s.norm() == 0.0 {
        return m;
    }
    [m[0] / s, m[1] / s, m[2] / s, m[3] / s]
}

/// How a self-map was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certification {
    /// Family parameters imply `Re phi > 0` on all of the half-plane.
    Exact,
    /// `Re phi > 0` was observed at every grid point only.
    Sampled,
}

/// A symbol that passed `validate_self_map`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfMap {
    symbol: Symbol,
    certification: Certification,
}

impl SelfMap {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn known_lambda(&self) -> Option<f64> {
        self.symbol.known_lambda()
    }

    /// `phi(z)`; fails if the value leaves the half-plane.
    pub fn eval(&self, z: HalfPlanePoint) -> Result<Complex64> {
        let w = self.symbol.apply(z.z());
        if w.re > 0.0 && w.re.is_finite() && w.im.is_finite() {
            Ok(w)
        } else {
            Err(BergError::Domain { z: z.z(), value: w })
        }
    }

    pub fn eval_point(&self, z: HalfPlanePoint) -> Result<HalfPlanePoint> {
        self.eval(z).map(HalfPlanePoint)
    }

    /// `self o inner`; a composition of self-maps is again one.
    pub fn compose(&self, inner: &SelfMap) -> SelfMap {
        let certification = match (self.certification, inner.certification) {
            (Certification::Exact, Certification::Exact) => Certification::Exact,
            _ => Certification::Sampled,
        };
        SelfMap {
            symbol: self.symbol.then_inner(&inner.symbol),
            certification,
        }
    }

    /// `phi o ... o phi` (`n` times, `n >= 1`).
    pub fn iterate(&self, n: usize) -> Result<SelfMap> {
        if n == 0 {
            return Err(BergError::InvalidSymbol("iterate count must be at least 1".into()));
        }
        let mut acc = self.clone();
        for k in 2..=n {
            acc = self.compose(&acc);
            let scale = acc.symbol.coefficient_scale();
            if !scale.is_finite() || scale > OVERFLOW_LIMIT {
                return Err(BergError::Overflow(k));
            }
        }
        Ok(acc)
    }
}

pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Checks that `phi` maps the half-plane into itself. Affine and power maps
/// are decided exactly from their parameters; other families are checked at
/// every grid point.
pub fn validate_self_map(phi: &Symbol, grid: &SampleGrid) -> Result<SelfMap> {
    grid.validate()?;
    let certification = match phi {
        Symbol::Affine { a, b } => {
            check_affine(*a, *b)?;
            Certification::Exact
        }
        Symbol::Power { p } => {
            check_power(*p)?;
            Certification::Exact
        }
        Symbol::Moebius { a, b, c, d } => {
            if (a * d - b * c).norm() == 0.0 {
                return Err(BergError::InvalidSymbol("degenerate Moebius map (ad - bc = 0)".into()));
            }
            sample_check(phi, grid)?;
            Certification::Sampled
        }
        Symbol::Cayley { disc } => {
            check_disc_map(disc)?;
            sample_check(phi, grid)?;
            Certification::Sampled
        }
        Symbol::Compose { left, right } => {
            let l = validate_self_map(left, grid)?;
            let r = validate_self_map(right, grid)?;
            if l.certification == Certification::Exact && r.certification == Certification::Exact {
                Certification::Exact
            } else {
                sample_check(phi, grid)?;
                Certification::Sampled
            }
        }
    };
    Ok(SelfMap {
        symbol: phi.clone(),
        certification,
    })
}

fn check_affine(a: f64, b: Complex64) -> Result<()> {
    if !a.is_finite() || !b.re.is_finite() || !b.im.is_finite() {
        return Err(BergError::InvalidSymbol("non-finite affine coefficients".into()));
    }
    if a == 0.0 {
        return Err(BergError::InvalidSymbol(
            "constant map has no angular derivative at infinity".into(),
        ));
    }
    if a < 0.0 {
        let x = (b.re.abs() + 1.0) / -a;
        return Err(BergError::NotSelfMap {
            witness: x.into(),
            value: a * x + b.re,
        });
    }
    if b.re < 0.0 {
        let x = -b.re / (2.0 * a);
        return Err(BergError::NotSelfMap {
            witness: x.into(),
            value: a * x + b.re,
        });
    }
    Ok(())
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(BergError::InvalidSymbol(format!("power exponent {p} must be positive")));
    }
    if p > 1.0 {
        // arg z = theta with p theta in (pi/2, pi]
        let theta = 0.5 * (FRAC_PI_2 / p + (3.0 * FRAC_PI_2 / p).min(FRAC_PI_2));
        let z = Complex64::from_polar(1.0, theta);
        return Err(BergError::NotSelfMap {
            witness: z,
            value: crate::numeric::cpow(z, p).re,
        });
    }
    Ok(())
}

fn sample_check(phi: &Symbol, grid: &SampleGrid) -> Result<()> {
    for z in grid.points() {
        let w = phi.apply(z.z());
        if !(w.re > 0.0) || !w.im.is_finite() {
            return Err(BergError::NotSelfMap {
                witness: z.z(),
                value: w.re,
            });
        }
    }
    Ok(())
}

/// Radii and angles at which disc maps are sampled.
const DISC_SAMPLE_RADII: [f64; 6] = [0.0, 0.3, 0.6, 0.9, 0.99, 0.999];
const DISC_SAMPLE_ANGLES: usize = 64;

fn check_disc_map(psi: &DiscMap) -> Result<()> {
    if (psi.a * psi.d - psi.b * psi.c).norm() == 0.0 {
        return Err(BergError::InvalidSymbol("degenerate disc map".into()));
    }
    for r in DISC_SAMPLE_RADII {
        for k in 0..DISC_SAMPLE_ANGLES {
            let zeta = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / DISC_SAMPLE_ANGLES as f64);
            let w = psi.apply(zeta);
            if !(w.norm() < 1.0) {
                return Err(BergError::InvalidSymbol(format!(
                    "disc map sends {zeta} to {w}, outside the unit disc"
                )));
            }
        }
    }
    Ok(())
}

/// Half-plane symbol `tau o psi o tau^{-1}` for a disc self-map `psi`.
pub fn cayley_conjugate(psi: DiscMap) -> Result<Symbol> {
    check_disc_map(&psi)?;
    Ok(Symbol::Cayley { disc: psi })
}
