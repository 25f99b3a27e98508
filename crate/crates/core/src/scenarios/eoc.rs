use std::fmt::Write as _;
use std::sync::Arc;

use log::info;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{error_norms, FeFunction, FeSpace};
use crate::linalg::SolverConfig;
use crate::mesh::{DiagonalRule, Mesh};
use crate::model::ModelParams;
use crate::semidiscrete::build_operators;
use crate::timestepping::{integrate, ButcherTableau, IntegrateOptions};

use super::mms::{exact_eta, exact_phi, mms_bathymetry, mms_forcing};

/// Errors of one manufactured-solution run at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EocRow {
    pub h: f64,
    pub dt: f64,
    pub l2_phi: f64,
    pub l2_eta: f64,
    pub h1_phi: f64,
    pub h1_eta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EocReport {
    pub degree: usize,
    pub rows: Vec<EocRow>,
    /// Set when a run failed; rows hold the meshes completed before it.
    pub failure: Option<String>,
}

/// `log(e1/e2) / log(h1/h2)`.
pub fn rate(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

impl EocReport {
    fn rates_of(&self, err: impl Fn(&EocRow) -> f64) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| rate(err(&w[0]), err(&w[1]), w[0].h, w[1].h))
            .collect()
    }

    pub fn l2_phi_rates(&self) -> Vec<f64> {
        self.rates_of(|r| r.l2_phi)
    }
    pub fn l2_eta_rates(&self) -> Vec<f64> {
        self.rates_of(|r| r.l2_eta)
    }
    pub fn h1_phi_rates(&self) -> Vec<f64> {
        self.rates_of(|r| r.h1_phi)
    }
    pub fn h1_eta_rates(&self) -> Vec<f64> {
        self.rates_of(|r| r.h1_eta)
    }

    /// Rates in time, using `dt` in place of `h`.
    pub fn temporal_rates(&self, err: impl Fn(&EocRow) -> f64) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| rate(err(&w[0]), err(&w[1]), w[0].dt, w[1].dt))
            .collect()
    }

    fn columns(&self) -> Vec<[Option<f64>; 9]> {
        let rates = [self.l2_phi_rates(), self.l2_eta_rates(), self.h1_phi_rates(), self.h1_eta_rates()];
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let rt = |k: usize| if i == 0 { None } else { Some(rates[k][i - 1]) };
                [
                    Some(r.h),
                    Some(r.l2_phi),
                    rt(0),
                    Some(r.l2_eta),
                    rt(1),
                    Some(r.h1_phi),
                    rt(2),
                    Some(r.h1_eta),
                    rt(3),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,dt,l2_phi,rate_l2_phi,l2_eta,rate_l2_eta,h1_phi,rate_h1_phi,h1_eta,rate_h1_eta\n");
        for (row, cols) in self.rows.iter().zip(self.columns()) {
            let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.10e}"));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                f(cols[0]),
                f(Some(row.dt)),
                f(cols[1]),
                f(cols[2]),
                f(cols[3]),
                f(cols[4]),
                f(cols[5]),
                f(cols[6]),
                f(cols[7]),
                f(cols[8])
            );
        }
        s
    }

    /// Aligned text table: errors in scientific notation, rates with three decimals.
    pub fn to_table(&self) -> String {
        let header = ["h", "E0[h,phi]", "r", "E0[h,eta]", "r", "E1[h,phi]", "r", "E1[h,eta]", "r"];
        let cells: Vec<Vec<String>> = self
            .columns()
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(k, v)| match v {
                        None => "--".to_string(),
                        Some(v) if k % 2 == 0 && k > 0 => format!("{v:.3}"),
                        Some(v) => format!("{v:.3e}"),
                    })
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = (0..9)
            .map(|k| cells.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        let line = |s: &mut String, items: &[&str]| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
            let _ = writeln!(s, "{}", padded.join("  ").trim_end());
        };
        line(&mut s, &header);
        for r in &cells {
            line(&mut s, &r.iter().map(String::as_str).collect::<Vec<_>>());
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(s, "aborted: {f}");
        }
        s
    }
}

/// One forced run on the `n × n` unit square; `h` is the longest edge.
pub fn mms_errors(
    params: &ModelParams,
    degree: usize,
    n: usize,
    rule: DiagonalRule,
    dt: f64,
    t_end: f64,
    tableau: &ButcherTableau,
) -> Result<(EocRow, Vec<f64>, Vec<f64>)> {
    let mesh = Arc::new(Mesh::rectangle([0.0, 1.0], [0.0, 1.0], n, n, rule)?);
    let h = mesh.h_max();
    let space = Arc::new(FeSpace::new(mesh, degree)?);
    let mut ops = build_operators(space.clone(), mms_bathymetry(), *params, SolverConfig::cholesky())?;
    ops.set_forcing(Some(mms_forcing(params)));
    let state0 = ops.initial_state(&exact_eta(0.0), &exact_phi(0.0))?;
    let mut opts = IntegrateOptions::new(dt, t_end);
    opts.relaxation = false;
    opts.tableau = tableau.clone();
    opts.log_every = usize::MAX;
    let run = integrate(&ops, state0, &opts).map_err(|f| f.error)?;
    let t = run.state.t;
    let e_eta = error_norms(&FeFunction::new(space.clone(), run.state.eta.clone()), &exact_eta(t));
    let e_phi = error_norms(&FeFunction::new(space.clone(), run.state.phi.clone()), &exact_phi(t));
    let h1 = |e: crate::fem::ErrorNorms| e.h1().ok_or_else(|| Error::Other("exact gradient missing".into()));
    let row = EocRow {
        h,
        dt,
        l2_phi: e_phi.l2,
        l2_eta: e_eta.l2,
        h1_phi: h1(e_phi)?,
        h1_eta: h1(e_eta)?,
    };
    Ok((row, run.state.eta, run.state.phi))
}

/// Sweep over the mesh family; a failed run stops the sweep and is recorded.
pub fn mms_sweep(
    params: &ModelParams,
    degree: usize,
    cells: &[usize],
    rule: DiagonalRule,
    dt: Option<f64>,
    t_end: f64,
) -> EocReport {
    let mut report = EocReport {
        degree,
        ..Default::default()
    };
    let rk4 = ButcherTableau::rk4();
    for &n in cells {
        let step = dt.unwrap_or(1.0 / n as f64);
        match mms_errors(params, degree, n, rule, step, t_end, &rk4) {
            Ok((row, _, _)) => {
                info!("mms r={degree} n={n}: L2 eta {:.3e}, L2 phi {:.3e}", row.l2_eta, row.l2_phi);
                report.rows.push(row);
            }
            Err(e) => {
                report.failure = Some(format!("n = {n}: {e}"));
                break;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params_from_theta;

    #[test]
    fn rate_formula() {
        assert!((rate(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-15);
        assert!((rate(1.0, 1.0 / 27.0, 1.0 / 8.0, 1.0 / 24.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn table_layout() {
        let row = |h: f64| EocRow {
            h,
            dt: 1e-3,
            l2_phi: h * h,
            l2_eta: 2.0 * h * h,
            h1_phi: h,
            h1_eta: 3.0 * h,
        };
        let rep = EocReport {
            degree: 1,
            rows: vec![row(0.125), row(0.0625)],
            failure: None,
        };
        let table = rep.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0].split_whitespace().next(), Some("h"));
        assert!(lines[1].starts_with("1.250e-1"));
        assert_eq!(lines[0].len(), lines[2].len());
        assert!(table.contains("2.000"));
        assert!(table.contains("--"));
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn coarse_sweep_decreases_error() {
        let params = params_from_theta(1.0, 1.0).unwrap();
        let rep = mms_sweep(&params, 1, &[4, 8], DiagonalRule::Right, Some(0.01), 0.1);
        assert!(rep.failure.is_none());
        assert!(rep.rows[1].l2_eta < rep.rows[0].l2_eta);
    }
}
