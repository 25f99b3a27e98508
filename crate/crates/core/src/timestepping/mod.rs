//! Explicit (relaxation) Runge–Kutta time integration with logging.

mod output;
mod relaxation;
mod tableau;

use std::path::PathBuf;

use log::{debug, info, warn};

pub use output::{vtk_snapshot, write_vtk, ConservationLog, ConservationRow, GaugeRecord};
pub use relaxation::{
    gamma_from_cubic, quadratic_roots, solve_relaxation_gamma, RelaxationRecord, RootStatus, GAMMA_WINDOW,
};
pub use tableau::{rk_direction, ButcherTableau};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::semidiscrete::{DiscreteOperators, State};

/// Weighted stage direction `(d_η, d_φ)` of one explicit step.
pub fn rk_step(
    ops: &DiscreteOperators,
    state: &State,
    tableau: &ButcherTableau,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ops.n_dofs();
    let mut y = Vec::with_capacity(2 * n);
    y.extend_from_slice(&state.eta);
    y.extend_from_slice(&state.phi);
    let mut stage = State::zeros(n);
    let mut d = rk_direction(tableau, state.t, dt, &y, |t, ys| {
        stage.eta.copy_from_slice(&ys[..n]);
        stage.phi.copy_from_slice(&ys[n..]);
        stage.t = t;
        let (a, b) = ops.rhs(&stage)?;
        let mut out = a;
        out.extend_from_slice(&b);
        Ok(out)
    })?;
    let d_phi = d.split_off(n);
    Ok((d, d_phi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub id: String,
    pub location: Point,
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    pub relaxation: bool,
    /// Continue with `γ = 1` instead of aborting when no admissible root exists.
    pub relaxation_fallback: bool,
    pub tableau: ButcherTableau,
    pub gauges: Vec<Gauge>,
    /// Conservation log cadence in steps (the first and last step are always logged).
    pub log_every: usize,
    pub snapshot_every: Option<usize>,
    pub snapshot_dir: Option<PathBuf>,
    /// Abort once `max |η|` exceeds this value.
    pub divergence_threshold: f64,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegrateOptions {
            dt,
            t_end,
            relaxation: true,
            relaxation_fallback: false,
            tableau: ButcherTableau::rk4(),
            gauges: Vec::new(),
            log_every: 1,
            snapshot_every: None,
            snapshot_dir: None,
            divergence_threshold: 1e6,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub state: State,
    pub log: ConservationLog,
    pub gauges: Vec<GaugeRecord>,
    pub relaxation: Vec<RelaxationRecord>,
    pub steps: usize,
}

/// A run that stopped early, with everything recorded up to the last
/// accepted step.
#[derive(Debug)]
pub struct IntegrationFailure {
    pub error: Error,
    pub partial: Integration,
}

impl std::fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} steps, t = {})", self.error, self.partial.steps, self.partial.state.t)
    }
}

impl std::error::Error for IntegrationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

struct GaugeProbe {
    cell: usize,
    lambda: [f64; 3],
}

/// Step size for the next step and whether it lands on `t_end`.
///
/// With relaxation the step that would overshoot is split so that the
/// last two steps have comparable size; the final step jumps to `t_end`.
fn next_step(t: f64, t_end: f64, dt: f64) -> (f64, bool) {
    let remaining = t_end - t;
    let eps = 1e-12 * t_end.abs().max(dt);
    if remaining <= dt + eps {
        (remaining, true)
    } else if remaining < 2.0 * dt {
        (0.5 * remaining, false)
    } else {
        (dt, false)
    }
}

pub fn integrate(
    ops: &DiscreteOperators,
    state0: State,
    opts: &IntegrateOptions,
) -> std::result::Result<Integration, Box<IntegrationFailure>> {
    let mut out = Integration {
        state: state0,
        log: ConservationLog::default(),
        gauges: Vec::new(),
        relaxation: Vec::new(),
        steps: 0,
    };
    let fail = |error: Error, out: Integration| Box::new(IntegrationFailure { error, partial: out });

    if let Err(e) = validate_options(opts, out.state.t) {
        return Err(fail(e, out));
    }
    if opts.dt >= 1.0 {
        warn!("time step {} is large; explicit stability may be lost", opts.dt);
    }
    let space = ops.space().clone();
    let mut probes = Vec::new();
    for g in &opts.gauges {
        match space.mesh().locate_point(g.location) {
            Some((cell, lambda)) => probes.push(GaugeProbe { cell, lambda }),
            None => {
                let e = Error::Domain(format!(
                    "gauge '{}' at ({}, {}) lies outside the mesh",
                    g.id, g.location[0], g.location[1]
                ));
                return Err(fail(e, out));
            }
        }
        out.gauges.push(GaugeRecord {
            id: g.id.clone(),
            location: g.location,
            times: Vec::new(),
            values: Vec::new(),
        });
    }
    let eta_fn = |coeffs: &[f64], p: &GaugeProbe| {
        let mut psi = [0.0; 6];
        crate::fem::basis_values(space.degree(), p.lambda, &mut psi);
        space.cell_dofs(p.cell).iter().zip(&psi).map(|(&i, w)| coeffs[i] * w).sum::<f64>()
    };
    let record = |out: &mut Integration, gamma: f64| {
        let q = ops.conserved(&out.state);
        out.log.rows.push(ConservationRow {
            t: out.state.t,
            mass: q.mass,
            energy: q.energy,
            vorticity: q.vorticity,
            gamma,
        });
    };
    let sample = |out: &mut Integration| {
        for (rec, p) in out.gauges.iter_mut().zip(&probes) {
            rec.times.push(out.state.t);
            rec.values.push(eta_fn(&out.state.eta, p));
        }
    };
    let snapshot = |out: &Integration| -> Result<()> {
        if let (Some(every), Some(dir)) = (opts.snapshot_every, &opts.snapshot_dir) {
            if every > 0 && out.steps.is_multiple_of(every) {
                let path = dir.join(format!("snapshot_{:06}.vtk", out.steps));
                write_vtk(&path, &space, &out.state.eta, &out.state.phi, &format!("t = {}", out.state.t))?;
            }
        }
        Ok(())
    };

    record(&mut out, 1.0);
    sample(&mut out);
    if let Err(e) = snapshot(&out) {
        return Err(fail(e, out));
    }
    let e0 = out.log.rows[0].energy;
    info!(
        "integrating {} dofs to t = {} with dt = {} (relaxation {})",
        ops.n_dofs(),
        opts.t_end,
        opts.dt,
        if opts.relaxation { "on" } else { "off" }
    );

    let mut done = false;
    while !done {
        if out.steps >= opts.max_steps {
            let e = Error::Other(format!("step limit {} reached at t = {}", opts.max_steps, out.state.t));
            return Err(fail(e, out));
        }
        let (h, last) = if opts.relaxation {
            next_step(out.state.t, opts.t_end, opts.dt)
        } else {
            let remaining = opts.t_end - out.state.t;
            if remaining <= opts.dt * (1.0 + 1e-12) {
                (remaining, true)
            } else {
                (opts.dt, false)
            }
        };
        let (d_eta, d_phi) = match rk_step(ops, &out.state, &opts.tableau, h) {
            Ok(d) => d,
            Err(e) => return Err(fail(e, out)),
        };
        let gamma = if opts.relaxation {
            match solve_relaxation_gamma(ops, &out.state, &d_eta, &d_phi, h) {
                Ok(rec) => {
                    out.relaxation.push(rec);
                    rec.gamma
                }
                Err(e) if opts.relaxation_fallback => {
                    warn!("{e}; continuing with gamma = 1");
                    out.relaxation.push(RelaxationRecord {
                        t: out.state.t,
                        gamma: 1.0,
                        cubic: f64::NAN,
                        quadratic: f64::NAN,
                        linear: f64::NAN,
                        status: RootStatus::Fallback,
                    });
                    1.0
                }
                Err(e) => return Err(fail(e, out)),
            }
        } else {
            1.0
        };
        let x = gamma * h;
        let mut next = State {
            eta: out.state.eta.iter().zip(&d_eta).map(|(y, d)| y + x * d).collect(),
            phi: out.state.phi.iter().zip(&d_phi).map(|(y, d)| y + x * d).collect(),
            t: if last { opts.t_end } else { out.state.t + x },
        };
        if !next.is_finite() {
            let e = Error::Divergence {
                t: next.t,
                reason: "non-finite values in the solution".into(),
            };
            return Err(fail(e, out));
        }
        let peak = next.max_abs_eta();
        if peak > opts.divergence_threshold {
            let e = Error::Divergence {
                t: next.t,
                reason: format!("max |eta| = {peak:e} exceeds {:e}", opts.divergence_threshold),
            };
            return Err(fail(e, out));
        }
        if last && opts.relaxation {
            debug!("final step of size {h} relaxed with gamma = {gamma}; time set to t_end");
        }
        std::mem::swap(&mut out.state, &mut next);
        out.steps += 1;
        done = last;
        sample(&mut out);
        if done || out.steps.is_multiple_of(opts.log_every.max(1)) {
            record(&mut out, gamma);
            if out.steps.is_multiple_of(1000) || done {
                let r = out.log.rows.last().unwrap();
                debug!("step {} t = {:.6} energy drift {:e}", out.steps, r.t, (r.energy - e0) / e0.abs().max(1e-300));
            }
        }
        if let Err(e) = snapshot(&out) {
            return Err(fail(e, out));
        }
    }
    Ok(out)
}

fn validate_options(opts: &IntegrateOptions, t0: f64) -> Result<()> {
    let mut errs = Vec::new();
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        errs.push(format!("time step must be positive, got {}", opts.dt));
    }
    if !(opts.t_end > t0) {
        errs.push(format!("final time {} must exceed the initial time {t0}", opts.t_end));
    }
    opts.tableau.validate().map_err(|e| errs.push(e.to_string())).ok();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(errs))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{FeSpace, ScalarField};
    use crate::linalg::SolverConfig;
    use crate::mesh::{DiagonalRule, Mesh};
    use crate::model::params_from_theta;
    use crate::semidiscrete::build_operators;

    fn ops(n: usize, r: usize) -> DiscreteOperators {
        let mesh = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], n, n, DiagonalRule::Right).unwrap();
        let space = Arc::new(FeSpace::new(Arc::new(mesh), r).unwrap());
        build_operators(
            space,
            ScalarField::new(|p| 1.0 + 0.2 * p[0]),
            params_from_theta(0.9, 1.0).unwrap(),
            SolverConfig::cholesky(),
        )
        .unwrap()
    }

    #[test]
    fn step_splitting() {
        assert_eq!(next_step(0.0, 1.0, 0.3), (0.3, false));
        let (h, last) = next_step(0.5, 1.0, 0.3);
        assert!(!last && (h - 0.25).abs() < 1e-15);
        assert_eq!(next_step(0.75, 1.0, 0.3), (0.25, true));
    }

    #[test]
    fn rest_state_unchanged() {
        let o = ops(3, 1);
        let s = State {
            eta: vec![0.0; o.n_dofs()],
            phi: vec![1.0; o.n_dofs()],
            t: 0.0,
        };
        let (de, dp) = rk_step(&o, &s, &ButcherTableau::rk4(), 0.1).unwrap();
        assert!(de.iter().chain(&dp).all(|v| v.abs() < 1e-13));
        let run = integrate(&o, s.clone(), &IntegrateOptions::new(0.1, 1.0)).unwrap();
        assert_eq!(run.state.t, 1.0);
        for (a, b) in run.state.phi.iter().zip(&s.phi) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(run.log.max_drift(|r| r.energy) < 1e-14);
    }

    #[test]
    fn relaxation_conserves_energy_and_mass() {
        let o = ops(4, 1);
        let sp = o.space().clone();
        let s = o
            .initial_state(
                &ScalarField::new(|p| 0.1 * (-20.0 * ((p[0] - 0.5).powi(2) + (p[1] - 0.4).powi(2))).exp()),
                &ScalarField::constant(0.0),
            )
            .unwrap();
        let mut opts = IntegrateOptions::new(0.05, 1.0);
        opts.gauges = vec![Gauge {
            id: "g0".into(),
            location: [0.5, 0.5],
        }];
        let run = integrate(&o, s, &opts).unwrap();
        let e0 = run.log.rows[0].energy;
        assert!(run.log.max_drift(|r| r.energy) <= 1e-10 * e0);
        assert!(run.log.max_drift(|r| r.mass) <= 1e-12);
        assert!(run.log.max_abs_vorticity() < 1e-12);
        assert!(run.gauges[0].times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(run.gauges[0].times.last(), Some(&1.0));
        assert_eq!(sp.n_dofs(), run.state.eta.len());
    }

    #[test]
    fn gauge_outside_mesh_is_an_error() {
        let o = ops(2, 1);
        let mut opts = IntegrateOptions::new(0.1, 0.2);
        opts.gauges = vec![Gauge {
            id: "far".into(),
            location: [5.0, 5.0],
        }];
        let r = integrate(&o, State::zeros(o.n_dofs()), &opts);
        assert!(matches!(r, Err(f) if matches!(f.error, Error::Domain(_))));
    }
}
