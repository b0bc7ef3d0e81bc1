//! Estimation of the angular derivative at infinity as the supremum of
//! `Re z / Re phi(z)` over a non-tangential grid.

use super::{SampleGrid, SelfMap};
use crate::error::{BergError, Result};
use serde::{Deserialize, Serialize};

/// Number of trailing shell-to-shell steps inspected by the classifier.
pub const TAIL_STEPS: usize = 5;
/// Minimum total growth of the shell maxima over the tail for divergence.
pub const DIVERGENCE_GROWTH: f64 = 1.5;
/// Maximum relative spread of the shell maxima over the tail for a plateau.
pub const PLATEAU_SPREAD: f64 = 1e-2;
/// Minimum `r_max / r_min` for a meaningful estimate.
pub const MIN_DYNAMIC_RANGE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRatio {
    pub radius: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularDerivativeEstimate {
    /// `Some(sup_ratio)` iff the verdict is finite.
    pub lambda_hat: Option<f64>,
    pub sup_ratio: f64,
    pub trace: Vec<ShellRatio>,
    pub verdict: Verdict,
    pub known_lambda: Option<f64>,
    /// `|lambda_hat - known| / known` when both exist.
    pub relative_error: Option<f64>,
}

pub fn angular_derivative_estimate(phi: &SelfMap, grid: &SampleGrid) -> Result<AngularDerivativeEstimate> {
    grid.validate()?;
    if grid.r_max / grid.r_min < MIN_DYNAMIC_RANGE {
        return Err(BergError::InvalidGrid(format!(
            "r_max / r_min = {} is below {MIN_DYNAMIC_RANGE}",
            grid.r_max / grid.r_min
        )));
    }
    if grid.radial_count <= TAIL_STEPS {
        return Err(BergError::InvalidGrid(format!(
            "need more than {TAIL_STEPS} shells to classify convergence"
        )));
    }

    let mut trace = Vec::with_capacity(grid.radial_count);
    for shell in grid.shells() {
        let mut max_ratio = f64::NEG_INFINITY;
        for z in &shell.points {
            let w = phi.eval(*z)?;
            max_ratio = max_ratio.max(z.re() / w.re);
        }
        trace.push(ShellRatio {
            radius: shell.radius,
            max_ratio,
        });
    }

    let sup_ratio = trace.iter().map(|s| s.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    let verdict = classify(&trace);
    let lambda_hat = (verdict == Verdict::Finite).then_some(sup_ratio);
    let known_lambda = phi.known_lambda();
    let relative_error = match (lambda_hat, known_lambda) {
        (Some(l), Some(k)) => Some((l - k).abs() / k),
        _ => None,
    };
    Ok(AngularDerivativeEstimate {
        lambda_hat,
        sup_ratio,
        trace,
        verdict,
        known_lambda,
        relative_error,
    })
}

/// Divergent when the shell maxima increase strictly at each of the last
/// `TAIL_STEPS` steps and grow by at least `DIVERGENCE_GROWTH` overall;
/// finite when they stay within `PLATEAU_SPREAD` of each other.
fn classify(trace: &[ShellRatio]) -> Verdict {
    let tail: Vec<f64> = trace[trace.len() - TAIL_STEPS - 1..]
        .iter()
        .map(|s| s.max_ratio)
        .collect();
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let first = tail[0];
    let last = tail[TAIL_STEPS];
    if increasing && last >= DIVERGENCE_GROWTH * first {
        return Verdict::Divergent;
    }
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if hi.is_finite() && hi > 0.0 && (hi - lo) / hi <= PLATEAU_SPREAD {
        Verdict::Finite
    } else {
        Verdict::Inconclusive
    }
}
