use super::HalfPlanePoint;
use crate::error::{BergError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Geometric,
}

/// Points in the sector `|arg z| <= aperture` on geometrically spaced shells
/// `|z| = r`. Every point satisfies `|Im z| <= tan(aperture) Re z`, so the
/// shells approach infinity non-tangentially.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub aperture: f64,
    pub r_min: f64,
    pub r_max: f64,
    #[serde(rename = "radial")]
    pub radial_count: usize,
    #[serde(rename = "angular")]
    pub angular_count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            aperture: FRAC_PI_3,
            r_min: 1.0,
            r_max: 1e6,
            radial_count: 40,
            angular_count: 9,
            spacing: Spacing::Geometric,
        }
    }
}

/// One radius of the grid with its points.
#[derive(Debug, Clone)]
pub struct Shell {
    pub radius: f64,
    pub points: Vec<HalfPlanePoint>,
}

impl SampleGrid {
    pub fn new(r_min: f64, r_max: f64, radial_count: usize, angular_count: usize, aperture: f64) -> Result<Self> {
        let g = Self {
            aperture,
            r_min,
            r_max,
            radial_count,
            angular_count,
            spacing: Spacing::Geometric,
        };
        g.validate()?;
        Ok(g)
    }

    /// Default grid with a different outer radius.
    pub fn with_r_max(r_max: f64) -> Self {
        Self {
            r_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aperture > 0.0 && self.aperture < FRAC_PI_2) {
            return Err(BergError::InvalidGrid(format!(
                "aperture {} must lie in (0, pi/2)",
                self.aperture
            )));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite() && self.r_max.is_finite()) {
            return Err(BergError::InvalidGrid("radii must be positive and finite".into()));
        }
        if self.radial_count == 0 || self.angular_count == 0 {
            return Err(BergError::InvalidGrid(
                "grid needs at least one shell and one angle".into(),
            ));
        }
        if self.radial_count > 1 && !(self.r_max > self.r_min) {
            return Err(BergError::InvalidGrid("r_max must exceed r_min".into()));
        }
        Ok(())
    }

    /// Geometric radii from `r_min` to exactly `r_max`.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.radial_count;
        if n == 1 {
            return vec![self.r_min];
        }
        let log_ratio = (self.r_max / self.r_min).ln();
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.r_max
                } else {
                    self.r_min * (log_ratio * k as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }

    /// Angles spread evenly over `[-aperture, aperture]`; an odd count includes 0.
    pub fn angles(&self) -> Vec<f64> {
        let m = self.angular_count;
        if m == 1 {
            return vec![0.0];
        }
        (0..m)
            .map(|k| {
                if 2 * k + 1 == m {
                    0.0
                } else {
                    -self.aperture + 2.0 * self.aperture * k as f64 / (m - 1) as f64
                }
            })
            .collect()
    }

    pub fn shells(&self) -> Vec<Shell> {
        let angles = self.angles();
        self.radii()
            .into_iter()
            .map(|radius| Shell {
                radius,
                points: angles.iter().map(|&t| polar_point(radius, t)).collect(),
            })
            .collect()
    }

    pub fn points(&self) -> Vec<HalfPlanePoint> {
        self.shells().into_iter().flat_map(|s| s.points).collect()
    }

    pub fn len(&self) -> usize {
        self.radial_count * self.angular_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Geometric mean radius `sqrt(r_min r_max)`; shells at or beyond it form the far field.
    pub fn far_field_radius(&self) -> f64 {
        (self.r_min * self.r_max).sqrt()
    }

    /// `count` real points spaced geometrically over `[r_min, r_max]`.
    pub fn real_axis_points(&self, count: usize) -> Vec<HalfPlanePoint> {
        let g = Self {
            radial_count: count,
            angular_count: 1,
            ..*self
        };
        g.radii().into_iter().map(|r| polar_point(r, 0.0)).collect()
    }

    /// `count` random points: a uniformly chosen shell radius and a uniform
    /// angle in the aperture for each.
    pub fn random_points<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<HalfPlanePoint> {
        let radii = self.radii();
        (0..count)
            .map(|_| {
                let r = radii[rng.gen_range(0..radii.len())];
                let t = rng.gen_range(-self.aperture..=self.aperture);
                polar_point(r, t)
            })
            .collect()
    }
}

fn polar_point(r: f64, theta: f64) -> HalfPlanePoint {
    let p = if theta == 0.0 {
        HalfPlanePoint::real(r)
    } else {
        HalfPlanePoint::from_polar(r, theta)
    };
    p.expect("grid points lie in the open sector")
}
