use std::sync::Arc;

use super::field::ScalarField;
use super::quadrature::gauss_legendre;
use super::space::{FeFunction, FeSpace, Tabulation};
use crate::error::Result;
use crate::linalg::{CsrMatrix, SolverConfig, SpdSolver};

/// Empty matrix carrying the FE sparsity pattern of `space`.
pub fn pattern_matrix(space: &FeSpace) -> CsrMatrix {
    let n = space.n_dofs();
    CsrMatrix::from_pattern(n, n, space.sparsity())
}

/// Assemble a symmetric bilinear form from an element kernel
/// `kernel(t, q, i, j)` that is evaluated only for `j >= i`.
fn assemble_symmetric(
    space: &FeSpace,
    tab: &Tabulation,
    mut kernel: impl FnMut(usize, usize, usize, usize) -> f64,
) -> CsrMatrix {
    let mut m = pattern_matrix(space);
    let nl = space.n_local();
    let mut local = vec![0.0; nl * nl];
    for t in 0..space.n_cells() {
        local.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..tab.quadrature.len() {
            for i in 0..nl {
                for j in i..nl {
                    local[i * nl + j] += kernel(t, q, i, j);
                }
            }
        }
        let dofs = space.cell_dofs(t);
        for i in 0..nl {
            m.add(dofs[i], dofs[i], local[i * nl + i]);
            for j in i + 1..nl {
                let v = local[i * nl + j];
                m.add(dofs[i], dofs[j], v);
                m.add(dofs[j], dofs[i], v);
            }
        }
    }
    m
}

/// Values of `weight` at every quadrature point, `out[t * nq + q]`.
pub fn sample_at_quadrature(space: &FeSpace, tab: &Tabulation, f: &ScalarField) -> Vec<f64> {
    let nq = tab.quadrature.len();
    let mut out = Vec::with_capacity(space.n_cells() * nq);
    for t in 0..space.n_cells() {
        let geo = space.geometry(t);
        for &lam in &tab.quadrature.points {
            out.push(f.value(geo.map(lam)));
        }
    }
    out
}

fn sample_weight(space: &FeSpace, tab: &Tabulation, weight: Option<&ScalarField>) -> Vec<f64> {
    match weight {
        Some(w) => sample_at_quadrature(space, tab, w),
        None => vec![1.0; space.n_cells() * tab.quadrature.len()],
    }
}

/// Weighted mass matrix `∫ w ψ_i ψ_j` (unit weight when `None`).
pub fn assemble_mass(space: &FeSpace, weight: Option<&ScalarField>) -> CsrMatrix {
    assemble_mass_with_degree(space, weight, space.default_quadrature_degree())
}

pub fn assemble_mass_with_degree(space: &FeSpace, weight: Option<&ScalarField>, degree: usize) -> CsrMatrix {
    let tab = space.tabulate(degree);
    let w = sample_weight(space, &tab, weight);
    let nq = tab.quadrature.len();
    assemble_symmetric(space, &tab, |t, q, i, j| {
        let psi = tab.values_at(q);
        space.geometry(t).area * tab.quadrature.weights[q] * w[t * nq + q] * psi[i] * psi[j]
    })
}

/// Weighted stiffness matrix `∫ w ∇ψ_i·∇ψ_j`.
pub fn assemble_stiffness(space: &FeSpace, weight: Option<&ScalarField>) -> CsrMatrix {
    assemble_stiffness_with_degree(space, weight, space.default_quadrature_degree())
}

pub fn assemble_stiffness_with_degree(space: &FeSpace, weight: Option<&ScalarField>, degree: usize) -> CsrMatrix {
    assemble_tensor_stiffness(space, weight, [1.0, 0.0, 1.0], degree)
}

/// Stiffness with a constant symmetric tensor `[kxx, kxy, kyy]`, e.g.
/// `[1, 0, 0]` keeps only the first-coordinate derivatives.
pub fn assemble_tensor_stiffness(
    space: &FeSpace,
    weight: Option<&ScalarField>,
    k: [f64; 3],
    degree: usize,
) -> CsrMatrix {
    let tab = space.tabulate(degree);
    let w = sample_weight(space, &tab, weight);
    let nq = tab.quadrature.len();
    let nl = space.n_local();
    let mut grads = vec![[0.0; 2]; nl];
    let mut last = (usize::MAX, usize::MAX);
    assemble_symmetric(space, &tab, |t, q, i, j| {
        let geo = space.geometry(t);
        if last != (t, q) {
            for (g, d) in grads.iter_mut().zip(tab.dlambda_at(q)) {
                *g = geo.gradient(*d);
            }
            last = (t, q);
        }
        let (a, b) = (grads[i], grads[j]);
        let form = k[0] * a[0] * b[0] + k[1] * (a[0] * b[1] + a[1] * b[0]) + k[2] * a[1] * b[1];
        geo.area * tab.quadrature.weights[q] * w[t * nq + q] * form
    })
}

/// Load vector from a pointwise integrand `f(t, q, x)` at quadrature points.
pub fn assemble_load_from(
    space: &FeSpace,
    tab: &Tabulation,
    mut f: impl FnMut(usize, usize, [f64; 2]) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs()];
    for t in 0..space.n_cells() {
        let geo = space.geometry(t);
        let dofs = space.cell_dofs(t);
        for (q, &lam) in tab.quadrature.points.iter().enumerate() {
            let v = geo.area * tab.quadrature.weights[q] * f(t, q, geo.map(lam));
            for (&i, p) in dofs.iter().zip(tab.values_at(q)) {
                out[i] += v * p;
            }
        }
    }
    out
}

/// `∫ f ψ_i`.
pub fn assemble_load(space: &FeSpace, f: &ScalarField) -> Vec<f64> {
    assemble_load_with_degree(space, f, space.default_quadrature_degree())
}

pub fn assemble_load_with_degree(space: &FeSpace, f: &ScalarField, degree: usize) -> Vec<f64> {
    let tab = space.tabulate(degree);
    assemble_load_from(space, &tab, |_, _, x| f.value(x))
}

/// Value and gradient of a discrete function at quadrature point `q` of cell `t`.
#[inline]
pub fn eval_at(space: &FeSpace, tab: &Tabulation, coeffs: &[f64], t: usize, q: usize) -> (f64, [f64; 2]) {
    let geo = space.geometry(t);
    let (mut v, mut d) = (0.0, [0.0; 3]);
    for ((&i, p), dl) in space.cell_dofs(t).iter().zip(tab.values_at(q)).zip(tab.dlambda_at(q)) {
        let c = coeffs[i];
        v += c * p;
        d[0] += c * dl[0];
        d[1] += c * dl[1];
        d[2] += c * dl[2];
    }
    (v, geo.gradient(d))
}

/// `∫ (D + η)∇φ·∇ψ_i`.
pub fn assemble_nonlinear_flux(space: &FeSpace, depth: &ScalarField, eta: &FeFunction, phi: &FeFunction) -> Vec<f64> {
    let degree = (3 * space.degree() + 2).max(space.default_quadrature_degree());
    let tab = space.tabulate(degree);
    let mut out = vec![0.0; space.n_dofs()];
    for t in 0..space.n_cells() {
        let geo = space.geometry(t);
        let dofs = space.cell_dofs(t);
        for (q, &lam) in tab.quadrature.points.iter().enumerate() {
            let (e, _) = eval_at(space, &tab, &eta.coeffs, t, q);
            let (_, gp) = eval_at(space, &tab, &phi.coeffs, t, q);
            let s = geo.area * tab.quadrature.weights[q] * (depth.value(geo.map(lam)) + e);
            for (&i, dl) in dofs.iter().zip(tab.dlambda_at(q)) {
                let g = geo.gradient(*dl);
                out[i] += s * (gp[0] * g[0] + gp[1] * g[1]);
            }
        }
    }
    out
}

/// `∫ |∇φ|² ψ_i`.
pub fn assemble_gradsq_load(space: &FeSpace, phi: &FeFunction) -> Vec<f64> {
    let degree = (3 * space.degree() - 2).max(space.default_quadrature_degree());
    let tab = space.tabulate(degree);
    assemble_load_from(space, &tab, |t, q, _| {
        let (_, g) = eval_at(space, &tab, &phi.coeffs, t, q);
        g[0] * g[0] + g[1] * g[1]
    })
}

/// L² projection onto the space, solved with the mass matrix.
pub fn l2_project(space: &Arc<FeSpace>, f: &ScalarField) -> Result<FeFunction> {
    let mass = assemble_mass(space, None);
    let load = assemble_load(space, f);
    let solver = SpdSolver::new(mass, SolverConfig::cholesky())?;
    Ok(FeFunction::new(space.clone(), solver.solve(&load)?))
}

/// Circulation `∮ ∇φ·t ds` around each cell, by Gauss–Legendre on the edges.
pub fn cell_circulation(phi: &FeFunction) -> Vec<f64> {
    let space = &phi.space;
    let (s, w) = gauss_legendre(space.degree() + 1);
    (0..space.n_cells())
        .map(|t| {
            let geo = space.geometry(t);
            let mut circ = 0.0;
            for e in 0..3 {
                let (a, b) = (e, (e + 1) % 3);
                let tangent = [
                    geo.points[b][0] - geo.points[a][0],
                    geo.points[b][1] - geo.points[a][1],
                ];
                for (&si, &wi) in s.iter().zip(&w) {
                    let mut lam = [0.0; 3];
                    lam[a] = 1.0 - si;
                    lam[b] = si;
                    let g = phi.grad_in_cell(t, lam);
                    circ += wi * (g[0] * tangent[0] + g[1] * tangent[1]);
                }
            }
            circ
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{DiagonalRule, Mesh};

    fn unit_triangle_space(degree: usize) -> FeSpace {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        FeSpace::new(Arc::new(mesh), degree).unwrap()
    }

    fn square_space(n: usize, degree: usize) -> Arc<FeSpace> {
        let mesh = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], n, n, DiagonalRule::Right).unwrap();
        Arc::new(FeSpace::new(Arc::new(mesh), degree).unwrap())
    }

    #[test]
    fn reference_mass_matrix() {
        let m = assemble_mass(&unit_triangle_space(1), None).to_dense();
        let area = 0.5;
        for i in 0..3 {
            for j in 0..3 {
                let expected = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((m[i][j] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reference_stiffness_matrix() {
        let s = assemble_stiffness(&unit_triangle_space(1), None).to_dense();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_weight_gives_zero_mass() {
        let sp = square_space(2, 2);
        let m = assemble_mass(&sp, Some(&ScalarField::constant(0.0)));
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn partition_of_unity_and_symmetry() {
        for degree in [1, 2] {
            let sp = square_space(3, degree);
            let m = assemble_mass(&sp, None);
            assert!(m.is_symmetric());
            let total: f64 = m.values().iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            let load = assemble_load(&sp, &ScalarField::constant(1.0));
            assert!((load.iter().sum::<f64>() - 1.0).abs() < 1e-14);

            let depth = ScalarField::new(|p| 1.0 + p[0] * p[1]);
            let s = assemble_stiffness(&sp, Some(&depth));
            assert!(s.is_symmetric());
            let ones = vec![1.0; sp.n_dofs()];
            assert!(s.matvec(&ones).iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn stiffness_weight_scaling() {
        let sp = square_space(2, 2);
        let s1 = assemble_stiffness(&sp, None);
        let s4 = assemble_stiffness(&sp, Some(&ScalarField::constant(2.0).product(&ScalarField::constant(2.0))));
        for (a, b) in s1.values().iter().zip(s4.values()) {
            assert!((4.0 * a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn load_of_basis_function_is_mass_column() {
        let sp = square_space(2, 2);
        let m = assemble_mass(&sp, None);
        let j = 5;
        let mut c = vec![0.0; sp.n_dofs()];
        c[j] = 1.0;
        let basis = FeFunction::new(sp.clone(), c);
        // Integrate cellwise so the integrand is exactly the local polynomial.
        let tab = sp.tabulate(4);
        let load = assemble_load_from(&sp, &tab, |t, q, _| eval_at(&sp, &tab, &basis.coeffs, t, q).0);
        for i in 0..sp.n_dofs() {
            assert!((load[i] - m.get(i, j)).abs() < 1e-15);
        }
    }

    #[test]
    fn flux_vanishes_for_constant_potential_and_dry_state() {
        let sp = square_space(2, 1);
        let depth = ScalarField::new(|p| 1.0 + 0.5 * p[0]);
        let eta = FeFunction::interpolate(sp.clone(), &ScalarField::new(|p| p[1]));
        let phi = FeFunction::interpolate(sp.clone(), &ScalarField::constant(3.0));
        assert!(assemble_nonlinear_flux(&sp, &depth, &eta, &phi).iter().all(|v| v.abs() < 1e-14));

        let dry = FeFunction::interpolate(sp.clone(), &ScalarField::new(|p| -(1.0 + 0.5 * p[0])));
        let phi = FeFunction::interpolate(sp.clone(), &ScalarField::new(|p| p[0] * p[0] + p[1]));
        assert!(assemble_nonlinear_flux(&sp, &depth, &dry, &phi).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn gradsq_of_linear_potential() {
        let sp = square_space(3, 2);
        let phi = FeFunction::interpolate(sp.clone(), &ScalarField::new(|p| p[0]));
        let load = assemble_gradsq_load(&sp, &phi);
        let ones = assemble_load(&sp, &ScalarField::constant(1.0));
        for (a, b) in load.iter().zip(&ones) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((load.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_is_identity_on_the_space() {
        let sp = square_space(3, 2);
        let f = ScalarField::new(|p| 1.0 - p[0] + 3.0 * p[0] * p[1] - p[1] * p[1]);
        let g = l2_project(&sp, &f).unwrap();
        let nodal = sp.interpolate(&f);
        for (a, b) in g.coeffs.iter().zip(&nodal) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = l2_project(&sp, &ScalarField::constant(0.0)).unwrap();
        assert!(z.coeffs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn circulation_vanishes() {
        let sp = square_space(3, 2);
        let phi = FeFunction::interpolate(sp.clone(), &ScalarField::new(|p| (3.0 * p[0]).sin() * p[1].exp()));
        let c = cell_circulation(&phi);
        assert!(c.iter().all(|v| v.abs() < 1e-13));
    }
}
