//! The Galerkin semidiscretization in potential form as an explicit ODE.
//!
//! All auxiliary fields of the mixed formulation are eliminated, leaving
//! two solves with the prefactored operator `M + b S` per evaluation:
//!
//! ```text
//! (M + bS) η̇ = ∫ (D + η)∇φ·∇ψ_i                      + F_η
//! (M + bS) φ̇ = −cg S η − g M η − ½ ∫ |∇φ|² ψ_i       + F_φ
//! ```
//!
//! where `S` is the stiffness matrix weighted by `D²`. Wall conditions are
//! natural, so no boundary terms appear.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_load_with_degree, assemble_mass_with_degree, assemble_stiffness_with_degree, cell_circulation,
    sample_at_quadrature, FeFunction, FeSpace, ScalarField, Tabulation,
};
use crate::linalg::{CsrMatrix, SolverConfig, SpdSolver};
use crate::mesh::Point;
use crate::model::ModelParams;

type SpaceTimeFn = dyn Fn(Point, f64) -> f64 + Send + Sync;

/// Source terms added to the two equations, used for manufactured solutions.
#[derive(Clone)]
pub enum Forcing {
    /// Evaluated at every quadrature point on every call.
    General {
        eta: Arc<SpaceTimeFn>,
        phi: Arc<SpaceTimeFn>,
    },
    /// Sums of `a_k(t) f_k(x)`; the spatial loads are assembled once.
    Separable {
        eta: Vec<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, ScalarField)>,
        phi: Vec<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, ScalarField)>,
    },
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::General { .. } => f.write_str("Forcing::General"),
            Forcing::Separable { eta, phi } => write!(f, "Forcing::Separable({} + {} terms)", eta.len(), phi.len()),
        }
    }
}

/// Forcing specialised to one space.
struct PreparedForcing {
    general: Option<(Arc<SpaceTimeFn>, Arc<SpaceTimeFn>)>,
    eta_terms: Vec<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, Vec<f64>)>,
    phi_terms: Vec<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, Vec<f64>)>,
}

/// Coefficient vectors of elevation and potential at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub eta: Vec<f64>,
    pub phi: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        State {
            eta: vec![0.0; n],
            phi: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().chain(&self.phi).all(|v| v.is_finite())
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.eta.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConservedQuantities {
    pub mass: f64,
    pub energy: f64,
    pub vorticity: f64,
}

/// Coefficients of `E(y + x d) − E(y) = ½ (Γ x + B x² + A x³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCubic {
    pub cubic: f64,
    pub quadratic: f64,
    pub linear: f64,
}

pub struct DiscreteOperators {
    space: Arc<FeSpace>,
    params: ModelParams,
    bathymetry: ScalarField,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    operator: CsrMatrix,
    /// `−(cg S + g M)`.
    phi_linear: CsrMatrix,
    solver: SpdSolver,
    tab: Tabulation,
    depth_q: Vec<f64>,
    unit_load: Vec<f64>,
    forcing: Option<PreparedForcing>,
}

impl std::fmt::Debug for DiscreteOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteOperators")
            .field("n_dofs", &self.space.n_dofs())
            .field("degree", &self.space.degree())
            .field("params", &self.params)
            .finish()
    }
}

/// Quadrature degree shared by every operator so that the discrete energy
/// identity holds to rounding.
pub fn operator_quadrature_degree(r: usize) -> usize {
    (2 * r + 3).max(3 * r + 2)
}

pub fn build_operators(
    space: Arc<FeSpace>,
    bathymetry: ScalarField,
    params: ModelParams,
    solver: SolverConfig,
) -> Result<DiscreteOperators> {
    let degree = operator_quadrature_degree(space.degree());
    let tab = space.tabulate(degree);
    let depth_q = sample_at_quadrature(&space, &tab, &bathymetry);
    let nq = tab.quadrature.len();
    for (k, &d) in depth_q.iter().enumerate() {
        if !(d > 0.0 && d.is_finite()) {
            let (t, q) = (k / nq, k % nq);
            let x = space.geometry(t).map(tab.quadrature.points[q]);
            return Err(Error::ModelValidity(format!(
                "depth D = {d} is not positive at ({}, {}) in cell {t}",
                x[0], x[1]
            )));
        }
    }
    let mass = assemble_mass_with_degree(&space, None, degree);
    let depth_sq = bathymetry.product(&bathymetry);
    let stiffness = assemble_stiffness_with_degree(&space, Some(&depth_sq), degree);
    let operator = mass.linear_combination(1.0, &stiffness, params.b);
    let phi_linear = mass.linear_combination(-params.g, &stiffness, -params.c * params.g);
    let solver = SpdSolver::new(operator.clone(), solver)?;
    let unit_load = assemble_load_with_degree(&space, &ScalarField::constant(1.0), space.degree());
    Ok(DiscreteOperators {
        space,
        params,
        bathymetry,
        mass,
        stiffness,
        operator,
        phi_linear,
        solver,
        tab,
        depth_q,
        unit_load,
        forcing: None,
    })
}

impl DiscreteOperators {
    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn bathymetry(&self) -> &ScalarField {
        &self.bathymetry
    }

    pub fn mass_matrix(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness_matrix(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    /// `∫ ψ_i`, so that `unit_load · η` is the mass.
    pub fn unit_load(&self) -> &[f64] {
        &self.unit_load
    }

    /// Attach source terms; separable terms are assembled immediately.
    pub fn set_forcing(&mut self, forcing: Option<Forcing>) {
        let load_degree = 2 * self.space.degree() + 6;
        self.forcing = forcing.map(|f| match f {
            Forcing::General { eta, phi } => PreparedForcing {
                general: Some((eta, phi)),
                eta_terms: Vec::new(),
                phi_terms: Vec::new(),
            },
            Forcing::Separable { eta, phi } => {
                let prep = |terms: Vec<(Arc<dyn Fn(f64) -> f64 + Send + Sync>, ScalarField)>| {
                    terms
                        .into_iter()
                        .map(|(a, f)| (a, assemble_load_with_degree(&self.space, &f, load_degree)))
                        .collect()
                };
                PreparedForcing {
                    general: None,
                    eta_terms: prep(eta),
                    phi_terms: prep(phi),
                }
            }
        });
    }

    pub fn has_forcing(&self) -> bool {
        self.forcing.is_some()
    }

    /// Right-hand sides before the solves: `(∫(D+η)∇φ·∇ψ_i, ∫|∇φ|²ψ_i)`.
    pub fn nonlinear_loads(&self, eta: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_dofs();
        let (mut flux, mut gradsq) = (vec![0.0; n], vec![0.0; n]);
        let tab = &self.tab;
        let nq = tab.quadrature.len();
        let nl = self.space.n_local();
        let mut grads = [[0.0; 2]; 6];
        for t in 0..self.space.n_cells() {
            let geo = self.space.geometry(t);
            let dofs = self.space.cell_dofs(t);
            for q in 0..nq {
                let psi = tab.values_at(q);
                let dl = tab.dlambda_at(q);
                let (mut e, mut gp) = (0.0, [0.0; 2]);
                for k in 0..nl {
                    grads[k] = geo.gradient(dl[k]);
                    let i = dofs[k];
                    e += eta[i] * psi[k];
                    gp[0] += phi[i] * grads[k][0];
                    gp[1] += phi[i] * grads[k][1];
                }
                let w = geo.area * tab.quadrature.weights[q];
                let s = w * (self.depth_q[t * nq + q] + e);
                let g2 = w * (gp[0] * gp[0] + gp[1] * gp[1]);
                for k in 0..nl {
                    let i = dofs[k];
                    flux[i] += s * (gp[0] * grads[k][0] + gp[1] * grads[k][1]);
                    gradsq[i] += g2 * psi[k];
                }
            }
        }
        (flux, gradsq)
    }

    fn add_forcing(&self, t: f64, f_eta: &mut [f64], f_phi: &mut [f64]) {
        let Some(f) = &self.forcing else { return };
        for (a, load) in &f.eta_terms {
            let s = a(t);
            f_eta.iter_mut().zip(load).for_each(|(y, l)| *y += s * l);
        }
        for (a, load) in &f.phi_terms {
            let s = a(t);
            f_phi.iter_mut().zip(load).for_each(|(y, l)| *y += s * l);
        }
        if let Some((fe, fp)) = &f.general {
            let tab = &self.tab;
            for c in 0..self.space.n_cells() {
                let geo = self.space.geometry(c);
                let dofs = self.space.cell_dofs(c);
                for (q, &lam) in tab.quadrature.points.iter().enumerate() {
                    let x = geo.map(lam);
                    let w = geo.area * tab.quadrature.weights[q];
                    let (ve, vp) = (w * fe(x, t), w * fp(x, t));
                    for (&i, p) in dofs.iter().zip(tab.values_at(q)) {
                        f_eta[i] += ve * p;
                        f_phi[i] += vp * p;
                    }
                }
            }
        }
    }

    /// Time derivatives `(η̇, φ̇)` of the semidiscrete system at `state`.
    pub fn rhs(&self, state: &State) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut b_eta, gradsq) = self.nonlinear_loads(&state.eta, &state.phi);
        let mut b_phi = self.phi_linear.matvec(&state.eta);
        b_phi.iter_mut().zip(&gradsq).for_each(|(y, l)| *y -= 0.5 * l);
        self.add_forcing(state.t, &mut b_eta, &mut b_phi);
        Ok((self.solver.solve(&b_eta)?, self.solver.solve(&b_phi)?))
    }

    /// Solve `(M + bS) x = b`.
    pub fn solve_operator(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solver.solve(b)
    }

    pub fn mass(&self, eta: &[f64]) -> f64 {
        crate::linalg::dot(&self.unit_load, eta)
    }

    pub fn energy(&self, eta: &[f64], phi: &[f64]) -> f64 {
        let (g, cg) = (self.params.g, self.params.c * self.params.g);
        let tab = &self.tab;
        let nq = tab.quadrature.len();
        let nl = self.space.n_local();
        let mut e_total = 0.0;
        for t in 0..self.space.n_cells() {
            let geo = self.space.geometry(t);
            let dofs = self.space.cell_dofs(t);
            let mut cell = 0.0;
            for q in 0..nq {
                let psi = tab.values_at(q);
                let dl = tab.dlambda_at(q);
                let (mut e, mut de, mut dp) = (0.0, [0.0; 3], [0.0; 3]);
                for k in 0..nl {
                    let i = dofs[k];
                    e += eta[i] * psi[k];
                    for a in 0..3 {
                        de[a] += eta[i] * dl[k][a];
                        dp[a] += phi[i] * dl[k][a];
                    }
                }
                let (ge, gp) = (geo.gradient(de), geo.gradient(dp));
                let d = self.depth_q[t * nq + q];
                cell += tab.quadrature.weights[q]
                    * (g * e * e
                        + (d + e) * (gp[0] * gp[0] + gp[1] * gp[1])
                        + cg * d * d * (ge[0] * ge[0] + ge[1] * ge[1]));
            }
            e_total += geo.area * cell;
        }
        0.5 * e_total
    }

    /// Signed sum of cell circulations of `∇φ`.
    pub fn vorticity(&self, phi: &[f64]) -> f64 {
        let f = FeFunction::new(self.space.clone(), phi.to_vec());
        cell_circulation(&f).iter().sum()
    }

    pub fn conserved(&self, state: &State) -> ConservedQuantities {
        ConservedQuantities {
            mass: self.mass(&state.eta),
            energy: self.energy(&state.eta, &state.phi),
            vorticity: self.vorticity(&state.phi),
        }
    }

    /// Directional energy expansion used by the relaxation step.
    pub fn energy_cubic(&self, state: &State, d_eta: &[f64], d_phi: &[f64]) -> EnergyCubic {
        let (g, cg) = (self.params.g, self.params.c * self.params.g);
        let tab = &self.tab;
        let nq = tab.quadrature.len();
        let nl = self.space.n_local();
        let (eta, phi) = (&state.eta, &state.phi);
        let (mut ca, mut cb, mut cc) = (0.0, 0.0, 0.0);
        for t in 0..self.space.n_cells() {
            let geo = self.space.geometry(t);
            let dofs = self.space.cell_dofs(t);
            let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
            for q in 0..nq {
                let psi = tab.values_at(q);
                let dl = tab.dlambda_at(q);
                let (mut e, mut de) = (0.0, 0.0);
                let (mut ge, mut gp, mut gde, mut gdp) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
                for k in 0..nl {
                    let i = dofs[k];
                    e += eta[i] * psi[k];
                    de += d_eta[i] * psi[k];
                    for a in 0..3 {
                        ge[a] += eta[i] * dl[k][a];
                        gp[a] += phi[i] * dl[k][a];
                        gde[a] += d_eta[i] * dl[k][a];
                        gdp[a] += d_phi[i] * dl[k][a];
                    }
                }
                let (ge, gp, gde, gdp) = (geo.gradient(ge), geo.gradient(gp), geo.gradient(gde), geo.gradient(gdp));
                let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
                let d = self.depth_q[t * nq + q];
                let w = tab.quadrature.weights[q];
                let gdp2 = dot(gdp, gdp);
                let gp_gdp = dot(gp, gdp);
                sa += w * de * gdp2;
                sb += w * (g * de * de + cg * d * d * dot(gde, gde) + (d + e) * gdp2 + 2.0 * de * gp_gdp);
                sc += w
                    * ((2.0 * g * e + dot(gp, gp)) * de
                        + 2.0 * cg * d * d * dot(ge, gde)
                        + 2.0 * (d + e) * gp_gdp);
            }
            ca += geo.area * sa;
            cb += geo.area * sb;
            cc += geo.area * sc;
        }
        EnergyCubic {
            cubic: ca,
            quadratic: cb,
            linear: cc,
        }
    }

    /// Gradient of the discrete energy with respect to the coefficients.
    pub fn energy_gradient(&self, eta: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (flux, gradsq) = self.nonlinear_loads(eta, phi);
        let mut d_eta = self.phi_linear.matvec(eta);
        for (y, l) in d_eta.iter_mut().zip(&gradsq) {
            *y = -*y + 0.5 * l;
        }
        (d_eta, flux)
    }

    /// L² projections of initial elevation and potential.
    pub fn initial_state(&self, eta0: &ScalarField, phi0: &ScalarField) -> Result<State> {
        let mass_solver = SpdSolver::new(self.mass.clone(), SolverConfig::cholesky())?;
        let degree = 2 * self.space.degree() + 6;
        let eta = mass_solver.solve(&assemble_load_with_degree(&self.space, eta0, degree))?;
        let phi = mass_solver.solve(&assemble_load_with_degree(&self.space, phi0, degree))?;
        Ok(State { eta, phi, t: 0.0 })
    }

    /// Recover the eliminated mixed-form fields and the residuals of the
    /// identities they satisfy.
    pub fn mixed_form_check(&self, state: &State) -> Result<MixedFormFields> {
        let mass_solver = SpdSolver::new(self.mass.clone(), SolverConfig::cholesky())?;
        let (eta_t, phi_t) = self.rhs(state)?;
        let neg = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
        let (flux, gradsq) = self.nonlinear_loads(&state.eta, &state.phi);
        let v = mass_solver.solve(&neg(self.stiffness.matvec(&state.eta)))?;
        let z = mass_solver.solve(&neg(self.stiffness.matvec(&state.phi)))?;
        let w = mass_solver.solve(&flux)?;
        let f = mass_solver.solve(&gradsq)?;
        let v_t = mass_solver.solve(&neg(self.stiffness.matvec(&eta_t)))?;
        let z_t = mass_solver.solve(&neg(self.stiffness.matvec(&phi_t)))?;
        let (mut f_eta, mut f_phi) = (vec![0.0; self.n_dofs()], vec![0.0; self.n_dofs()]);
        self.add_forcing(state.t, &mut f_eta, &mut f_phi);
        let b = self.params.b;
        let (g, cg) = (self.params.g, self.params.c * self.params.g);
        let lhs1: Vec<f64> = eta_t.iter().zip(&v_t).map(|(a, c)| a - b * c).collect();
        let r1: Vec<f64> = self.mass.matvec(&lhs1).iter().zip(self.mass.matvec(&w)).zip(&f_eta).map(|((a, c), fe)| a - c - fe).collect();
        let lhs2: Vec<f64> = phi_t.iter().zip(&z_t).map(|(a, c)| a - b * c).collect();
        let rhs2: Vec<f64> = (0..self.n_dofs())
            .map(|i| cg * v[i] - g * state.eta[i] - 0.5 * f[i])
            .collect();
        let m2 = self.mass.matvec(&rhs2);
        let r2: Vec<f64> = self.mass.matvec(&lhs2).iter().zip(&m2).zip(&f_phi).map(|((a, c), fp)| a - c - fp).collect();
        let scale = crate::linalg::norm2(&flux).max(crate::linalg::norm2(&m2)).max(1e-300);
        let residual = crate::linalg::norm2(&r1).max(crate::linalg::norm2(&r2)) / scale;
        Ok(MixedFormFields {
            dof_coords: self.space.dof_coords().to_vec(),
            v,
            w,
            z,
            f,
            residual,
        })
    }
}

/// Auxiliary fields of the mixed formulation at one state.
#[derive(Debug, Clone)]
pub struct MixedFormFields {
    pub dof_coords: Vec<Point>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    /// Relative residual of the two evolution identities.
    pub residual: f64,
}

impl MixedFormFields {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,y,v,w,z,f")?;
        for i in 0..self.v.len() {
            let p = self.dof_coords[i];
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p[0], p[1], self.v[i], self.w[i], self.z[i], self.f[i]
            )?;
        }
        Ok(())
    }
}
