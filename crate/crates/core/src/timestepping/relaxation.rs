use serde::Serialize;

use crate::error::{Error, Result};
use crate::semidiscrete::{DiscreteOperators, EnergyCubic, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    /// Root of the full quadratic.
    Quadratic,
    /// Cubic coefficient negligible; linear equation solved.
    Linear,
    /// Zero direction; `γ = 1` by convention.
    Trivial,
    /// No admissible root; the caller continued with `γ = 1`.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationRecord {
    pub t: f64,
    pub gamma: f64,
    pub cubic: f64,
    pub quadratic: f64,
    pub linear: f64,
    pub status: RootStatus,
}

/// Largest accepted `|γ − 1|`.
pub const GAMMA_WINDOW: f64 = 0.5;

/// Nonzero roots of `A x² + B x + Γ = 0`, avoiding cancellation.
pub fn quadratic_roots(k: &EnergyCubic) -> Result<(Vec<f64>, RootStatus)> {
    let (a, b, c) = (k.cubic, k.quadratic, k.linear);
    if a.abs() <= 1e-14 * b.abs() {
        if b == 0.0 {
            return Err(Error::Other("degenerate energy expansion (B = 0)".into()));
        }
        return Ok((vec![-c / b], RootStatus::Linear));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::Other(format!("negative discriminant {disc:e}")));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    Ok((roots, RootStatus::Quadratic))
}

/// Relaxation parameter restoring the energy along `state + γ dt d`.
pub fn solve_relaxation_gamma(
    ops: &DiscreteOperators,
    state: &State,
    d_eta: &[f64],
    d_phi: &[f64],
    dt: f64,
) -> Result<RelaxationRecord> {
    if d_eta.iter().chain(d_phi).all(|&v| v == 0.0) {
        return Ok(RelaxationRecord {
            t: state.t,
            gamma: 1.0,
            cubic: 0.0,
            quadratic: 0.0,
            linear: 0.0,
            status: RootStatus::Trivial,
        });
    }
    let k = ops.energy_cubic(state, d_eta, d_phi);
    gamma_from_cubic(&k, state.t, dt)
}

pub fn gamma_from_cubic(k: &EnergyCubic, t: f64, dt: f64) -> Result<RelaxationRecord> {
    let fail = |reason: String| Error::Relaxation { t, reason };
    let (roots, status) = quadratic_roots(k).map_err(|e| fail(e.to_string()))?;
    let gamma = roots
        .iter()
        .map(|x| x / dt)
        .filter(|g| *g > 0.0 && g.is_finite())
        .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
        .ok_or_else(|| fail(format!("no positive root among {roots:?}")))?;
    if (gamma - 1.0).abs() > GAMMA_WINDOW {
        return Err(fail(format!("gamma = {gamma} too far from 1")));
    }
    Ok(RelaxationRecord {
        t,
        gamma,
        cubic: k.cubic,
        quadratic: k.quadratic,
        linear: k.linear,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_root_nearest_one() {
        // Roots x = 0.1 and x = 0.35 (A = 1): (x - 0.1)(x - 0.35).
        let k = EnergyCubic {
            cubic: 1.0,
            quadratic: -0.45,
            linear: 0.035,
        };
        let r = gamma_from_cubic(&k, 0.0, 0.1).unwrap();
        assert!((r.gamma - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_branch() {
        let k = EnergyCubic {
            cubic: 1e-20,
            quadratic: 2.0,
            linear: -0.2 * 1.01,
        };
        let r = gamma_from_cubic(&k, 0.0, 0.1).unwrap();
        assert_eq!(r.status, RootStatus::Linear);
        assert!((r.gamma - 1.01).abs() < 1e-12);
    }

    #[test]
    fn failures_reported() {
        let neg = EnergyCubic {
            cubic: 1.0,
            quadratic: 0.0,
            linear: 1.0,
        };
        assert!(matches!(gamma_from_cubic(&neg, 1.0, 0.1), Err(Error::Relaxation { .. })));
        let far = EnergyCubic {
            cubic: 0.0,
            quadratic: 1.0,
            linear: -0.3,
        };
        assert!(gamma_from_cubic(&far, 1.0, 0.1).is_err());
    }
}
