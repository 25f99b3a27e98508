//! Lagrange finite elements on triangles: spaces, quadrature, assembly.

mod assembly;
mod field;
mod norms;
mod quadrature;
mod space;

pub use assembly::{
    assemble_gradsq_load, assemble_load, assemble_load_from, assemble_load_with_degree, assemble_mass,
    assemble_mass_with_degree, assemble_nonlinear_flux, assemble_stiffness, assemble_stiffness_with_degree,
    assemble_tensor_stiffness, cell_circulation, eval_at, l2_project, pattern_matrix, sample_at_quadrature,
};
pub use field::{ScalarField, VectorField};
pub use norms::{error_norms, integral, ErrorNorms};
pub use quadrature::{gauss_legendre, Quadrature};
pub use space::{basis_dlambda, basis_values, local_dof_count, ElementGeometry, FeFunction, FeSpace, Tabulation};
