//! Shared problem setups for the benchmarks under `benches/`.

use std::sync::Arc;

use boussinesq_core::fem::{FeSpace, ScalarField};
use boussinesq_core::linalg::SolverConfig;
use boussinesq_core::mesh::{DiagonalRule, Mesh};
use boussinesq_core::model::{analytic_solitary, params_from_theta};
use boussinesq_core::semidiscrete::{build_operators, DiscreteOperators, State};

pub fn channel_space(nx: usize, ny: usize, degree: usize) -> Arc<FeSpace> {
    let mesh = Mesh::rectangle([-25.0, 25.0], [0.0, 2.0], nx, ny, DiagonalRule::Right).expect("valid rectangle");
    Arc::new(FeSpace::new(Arc::new(mesh), degree).expect("valid space"))
}

/// Flat-bottom operators with an analytic solitary wave as the state.
pub fn solitary_problem(nx: usize, ny: usize, degree: usize) -> (DiscreteOperators, State) {
    let theta_sq = 9.0 / 11.0;
    let params = params_from_theta(theta_sq, 1.0).expect("valid theta");
    let ops = build_operators(channel_space(nx, ny, degree), ScalarField::constant(1.0), params, SolverConfig::cholesky())
        .expect("operators assemble");
    let wave = analytic_solitary(theta_sq, 1.0, 1.0, [1.0, 0.0], 5.0).expect("solitary exists");
    let state = ops
        .initial_state(&wave.eta_field(0.0), &wave.potential_field(0.0))
        .expect("initial state");
    (ops, state)
}
