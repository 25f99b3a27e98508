use serde::{Deserialize, Serialize};

use super::{dot, norm2, CsrMatrix, EnvelopeCholesky};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    CgJacobi,
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    /// Declare the constant vector as the matrix null space (pure Neumann).
    pub constant_null_space: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::CgJacobi,
            rel_tolerance: 1e-12,
            max_iterations: 20_000,
            constant_null_space: false,
        }
    }
}

impl SolverConfig {
    pub fn cholesky() -> Self {
        SolverConfig {
            method: SolverMethod::Cholesky,
            ..Default::default()
        }
    }

    pub fn neumann() -> Self {
        SolverConfig {
            constant_null_space: true,
            ..Default::default()
        }
    }
}

/// Symmetric positive-definite solver bound to one matrix. Factorizations
/// are computed once at construction and reused for every right-hand side.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: CsrMatrix,
    config: SolverConfig,
    inv_diag: Vec<f64>,
    factor: Option<EnvelopeCholesky>,
}

impl SpdSolver {
    pub fn new(matrix: CsrMatrix, config: SolverConfig) -> Result<Self> {
        if config.method == SolverMethod::Cholesky && config.constant_null_space {
            return Err(Error::Other(
                "cholesky cannot factor a singular operator; use cg_jacobi with a null space".into(),
            ));
        }
        let diag = matrix.diagonal();
        if let Some((i, d)) = diag.iter().enumerate().find(|(_, d)| **d <= 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: *d });
        }
        let inv_diag = diag.iter().map(|d| 1.0 / d).collect();
        let factor = match config.method {
            SolverMethod::Cholesky => Some(EnvelopeCholesky::factor(&matrix)?),
            SolverMethod::CgJacobi => None,
        };
        Ok(SpdSolver {
            matrix,
            config,
            inv_diag,
            factor,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.factor {
            Some(f) => Ok(f.solve(b)),
            None => self.solve_cg(b).map(|(x, _)| x),
        }
    }

    /// Preconditioned CG; returns the solution and the iteration count.
    pub fn solve_cg(&self, b: &[f64]) -> Result<(Vec<f64>, usize)> {
        let n = b.len();
        let project = |v: &mut [f64]| {
            if self.config.constant_null_space {
                let mean = v.iter().sum::<f64>() / n as f64;
                v.iter_mut().for_each(|x| *x -= mean);
            }
        };
        let mut r = b.to_vec();
        project(&mut r);
        let bnorm = norm2(&r);
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok((x, 0));
        }
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(r, d)| r * d).collect();
        project(&mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let tol = self.config.rel_tolerance * bnorm;
        for it in 1..=self.config.max_iterations {
            self.matrix.matvec_into(&p, &mut ap);
            project(&mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: it, value: pap });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm2(&r) <= tol {
                project(&mut x);
                // Guard against drift of the recursive residual.
                let mut true_r = self.matrix.matvec(&x);
                for i in 0..n {
                    true_r[i] = b[i] - true_r[i];
                }
                project(&mut true_r);
                if norm2(&true_r) <= 10.0 * tol {
                    return Ok((x, it));
                }
                r = true_r;
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            project(&mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NonConvergence {
            iterations: self.config.max_iterations,
            residual: norm2(&r) / bnorm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let s = SpdSolver::new(CsrMatrix::identity(5), SolverConfig::default()).unwrap();
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        let x = s.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_both_methods() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        for cfg in [SolverConfig::default(), SolverConfig::cholesky()] {
            let x = SpdSolver::new(a.clone(), cfg).unwrap().solve(&[1.0, 2.0]).unwrap();
            assert!((x[0] - 1.0 / 11.0).abs() < 1e-13);
            assert!((x[1] - 7.0 / 11.0).abs() < 1e-13);
        }
    }

    #[test]
    fn non_convergence_carries_residual() {
        let n = 50;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 2.0));
            if i + 1 < n {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        let cfg = SolverConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let s = SpdSolver::new(CsrMatrix::from_triplets(n, n, &trip), cfg).unwrap();
        match s.solve(&vec![1.0; n]) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_with_null_space_rejected() {
        let cfg = SolverConfig {
            method: SolverMethod::Cholesky,
            constant_null_space: true,
            ..Default::default()
        };
        assert!(SpdSolver::new(CsrMatrix::identity(2), cfg).is_err());
    }
}
