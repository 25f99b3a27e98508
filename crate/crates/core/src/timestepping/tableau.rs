use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Explicit Runge–Kutta method in Butcher form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButcherTableau {
    pub name: String,
    /// Row-major `s × s`, strictly lower triangular.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, order: usize) -> Result<Self> {
        let t = ButcherTableau {
            name: name.to_string(),
            a,
            b,
            c,
            order,
        };
        t.validate()?;
        Ok(t)
    }

    /// Classical four-stage, fourth-order method.
    pub fn rk4() -> Self {
        ButcherTableau {
            name: "rk4".into(),
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
            order: 4,
        }
    }

    /// Three-stage, third-order strong-stability-preserving method.
    pub fn ssp_rk3() -> Self {
        ButcherTableau {
            name: "ssp_rk3".into(),
            a: vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.25, 0.25, 0.0]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
            order: 3,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "rk4" => Ok(Self::rk4()),
            "ssp_rk3" => Ok(Self::ssp_rk3()),
            other => Err(Error::Domain(format!("unknown tableau '{other}' (expected rk4 or ssp_rk3)"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.b.len();
        if s == 0 || self.c.len() != s || self.a.len() != s || self.a.iter().any(|r| r.len() != s) {
            return Err(Error::Domain(format!("tableau '{}' has inconsistent sizes", self.name)));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row[i..].iter().any(|&v| v != 0.0) {
                return Err(Error::Domain(format!("tableau '{}' is not explicit (row {i})", self.name)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - self.c[i]).abs() > 1e-14 {
                return Err(Error::Domain(format!(
                    "tableau '{}': c[{i}] = {} but row sum is {sum}",
                    self.name, self.c[i]
                )));
            }
        }
        let bs: f64 = self.b.iter().sum();
        if (bs - 1.0).abs() > 1e-14 {
            return Err(Error::Domain(format!("tableau '{}': weights sum to {bs}", self.name)));
        }
        Ok(())
    }
}

/// Weighted stage sum `d = Σ b_i f(t + c_i dt, Y_i)` for a flat state vector.
pub fn rk_direction(
    tableau: &ButcherTableau,
    t: f64,
    dt: f64,
    y: &[f64],
    mut f: impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let s = tableau.stages();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stage = y.to_vec();
    for i in 0..s {
        stage.copy_from_slice(y);
        for (j, kj) in k.iter().enumerate() {
            let a = tableau.a[i][j];
            if a != 0.0 {
                stage.iter_mut().zip(kj).for_each(|(yi, ki)| *yi += dt * a * ki);
            }
        }
        let ki = f(t + tableau.c[i] * dt, &stage).map_err(|e| Error::Stage {
            stage: i,
            source: Box::new(e),
        })?;
        k.push(ki);
    }
    let mut d = vec![0.0; y.len()];
    for (bi, ki) in tableau.b.iter().zip(&k) {
        d.iter_mut().zip(ki).for_each(|(di, v)| *di += bi * v);
    }
    Ok(d)
}
