//! Sparse storage and the linear solvers used by projections, elliptic
//! updates and Poisson problems.

mod banded;
mod cholesky;
mod csr;
pub mod ordering;
mod solver;

pub use banded::BandedLu;
pub use cholesky::EnvelopeCholesky;
pub use csr::{dot, norm2, CsrMatrix};
pub use solver::{SolverConfig, SolverMethod, SpdSolver};
