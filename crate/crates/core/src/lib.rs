//! Finite-element solver for Bona–Smith Boussinesq systems with slip walls.

pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod semidiscrete;
pub mod timestepping;
pub mod scenarios;
pub mod wave_setup;

pub use error::{Error, Result};
pub use fem::{FeFunction, FeSpace, ScalarField};
pub use mesh::{Mesh, Point};
