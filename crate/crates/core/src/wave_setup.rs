//! Initial data: numerical solitary waves, initial potentials and the
//! submerged-bar wavetrain.

use std::io::Write;
use std::sync::Arc;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_load_from, assemble_mass, assemble_stiffness, assemble_tensor_stiffness, eval_at, FeFunction, FeSpace,
    ScalarField, VectorField,
};
use crate::linalg::{norm2, BandedLu, CsrMatrix, SolverConfig, SpdSolver};
use crate::mesh::{DiagonalRule, Mesh, Point};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetviashviliConfig {
    pub speed: f64,
    pub depth: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_exponent() -> f64 {
    2.0
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_max_iterations() -> usize {
    50
}

impl PetviashviliConfig {
    pub fn new(speed: f64, depth: f64) -> Self {
        PetviashviliConfig {
            speed,
            depth,
            exponent: default_exponent(),
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.exponent > 1.0) {
            errs.push(format!("exponent p = {} must exceed 1", self.exponent));
        }
        if !(self.tolerance > 0.0) {
            errs.push(format!("tolerance = {} must be positive", self.tolerance));
        }
        if !(self.depth > 0.0) {
            errs.push(format!("depth = {} must be positive", self.depth));
        }
        if !(self.speed > 0.0) {
            errs.push(format!("speed = {} must be positive", self.speed));
        }
        if self.max_iterations == 0 {
            errs.push("max_iterations must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Travelling-wave unknowns on the channel mesh, in channel coordinates
/// `(ξ, ζ)`: elevation `η`, longitudinal velocity `w`, transverse velocity `w̃`.
#[derive(Debug, Clone)]
pub struct TravelingWaveSolution {
    pub space: Arc<FeSpace>,
    pub eta: Vec<f64>,
    pub w: Vec<f64>,
    pub w_transverse: Vec<f64>,
    pub residuals: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub speed: f64,
    pub depth: f64,
}

impl TravelingWaveSolution {
    pub fn amplitude(&self) -> f64 {
        self.eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_multiplier(&self) -> f64 {
        self.multipliers.last().copied().unwrap_or(f64::NAN)
    }

    /// Samples along the channel centreline, `n` equispaced points.
    pub fn centerline_profile(&self, n: usize) -> Profile {
        let mesh = self.space.mesh();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in mesh.vertices() {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        let yc = 0.5 * (y0 + y1);
        let eta = FeFunction::new(self.space.clone(), self.eta.clone());
        let w = FeFunction::new(self.space.clone(), self.w.clone());
        let mut prof = Profile {
            xi: Vec::with_capacity(n),
            eta: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
        };
        // Walk cells along the centreline once instead of locating each point.
        let mut cells: Vec<(usize, f64, f64)> = (0..mesh.n_triangles())
            .filter_map(|t| {
                let pts = mesh.triangle_points(t);
                let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
                let (ylo, yhi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[1]), b.max(p[1])));
                (ylo <= yc && yc <= yhi).then_some((t, lo, hi))
            })
            .collect();
        cells.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut start = 0;
        for k in 0..n {
            let x = x0 + (x1 - x0) * k as f64 / (n.max(2) - 1) as f64;
            while start < cells.len() && cells[start].2 < x - 1e-12 * (x1 - x0) {
                start += 1;
            }
            let mut found = None;
            for &(t, lo, hi) in &cells[start..] {
                if lo > x + 1e-12 * (x1 - x0) {
                    break;
                }
                let lam = mesh.barycentric(t, [x, yc]);
                if lam.iter().all(|&l| l >= -1e-10) && x <= hi + 1e-12 {
                    found = Some((t, lam));
                    break;
                }
            }
            let (t, lam) = found.or_else(|| mesh.locate_point([x, yc])).expect("centreline point inside channel");
            prof.xi.push(x);
            prof.eta.push(eta.eval_in_cell(t, lam));
            prof.w.push(w.eval_in_cell(t, lam));
        }
        prof
    }

    pub fn write_profile_csv(&self, n: usize, mut out: impl Write) -> std::io::Result<()> {
        let p = self.centerline_profile(n);
        writeln!(out, "xi,eta,w")?;
        for i in 0..p.xi.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", p.xi[i], p.eta[i], p.w[i])?;
        }
        Ok(())
    }
}

/// One-dimensional travelling-wave profile with linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub w: Vec<f64>,
}

impl Profile {
    fn interp(&self, values: &[f64], x: f64) -> f64 {
        let xs = &self.xi;
        if xs.is_empty() || x <= xs[0] || x >= *xs.last().unwrap() {
            return 0.0;
        }
        let k = xs.partition_point(|&s| s <= x);
        let (a, b) = (xs[k - 1], xs[k]);
        let s = (x - a) / (b - a);
        values[k - 1] * (1.0 - s) + values[k] * s
    }

    pub fn eta_at(&self, xi: f64) -> f64 {
        self.interp(&self.eta, xi)
    }

    pub fn w_at(&self, xi: f64) -> f64 {
        self.interp(&self.w, xi)
    }

    /// Location of the maximum elevation.
    pub fn crest(&self) -> f64 {
        let k = self
            .eta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k);
        self.xi[k]
    }

    /// Elevation and velocity fields translated so the crest sits at
    /// `direction·x = crest_at` and the wave moves along `direction`.
    pub fn place(&self, direction: [f64; 2], crest_at: f64) -> (ScalarField, VectorField) {
        let n = direction[0].hypot(direction[1]);
        let a = [direction[0] / n, direction[1] / n];
        let offset = self.crest() - crest_at;
        let p1 = Arc::new(self.clone());
        let p2 = p1.clone();
        let eta = ScalarField::new(move |x: Point| p1.eta_at(a[0] * x[0] + a[1] * x[1] + offset));
        let u = VectorField::new(move |x: Point| {
            // u = A w with w̃ = 0.
            let w = p2.w_at(a[0] * x[0] + a[1] * x[1] + offset);
            [a[0] * w, a[1] * w]
        });
        (eta, u)
    }
}

/// The symmetric reflection `A = [[α_x, α_y], [α_y, −α_x]]` relating
/// velocities in physical and channel frames (`A² = I`).
pub fn direction_matrix(alpha: [f64; 2]) -> [[f64; 2]; 2] {
    [[alpha[0], alpha[1]], [alpha[1], -alpha[0]]]
}

/// Channel mesh `[-half_length, half_length] × [0, width]` with a
/// reflection-symmetric triangulation.
pub fn channel_mesh(half_length: f64, width: f64, h: f64) -> Result<Mesh> {
    let nx = (2.0 * half_length / h).ceil() as usize;
    let nx = nx + nx % 2;
    let ny = ((width / h).ceil() as usize).max(1);
    Mesh::rectangle([-half_length, half_length], [0.0, width], nx, ny, DiagonalRule::UnionJack)
}

/// Solitary wave of the Serre equations of the same speed, used as a starting guess.
pub fn serre_initial_guess(speed: f64, depth: f64, g: f64, space: &Arc<FeSpace>) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, lambda) = serre_parameters(speed, depth, g)?;
    let eta = ScalarField::new(move |x: Point| a / (lambda * x[0]).cosh().powi(2));
    let w = ScalarField::new(move |x: Point| {
        let e = a / (lambda * x[0]).cosh().powi(2);
        speed * e / (depth + e)
    });
    let mass = assemble_mass(space, None);
    let solver = SpdSolver::new(mass, SolverConfig::cholesky())?;
    let tab = space.tabulate(2 * space.degree() + 6);
    let le = assemble_load_from(space, &tab, |_, _, x| eta.value(x));
    let lw = assemble_load_from(space, &tab, |_, _, x| w.value(x));
    Ok((solver.solve(&le)?, solver.solve(&lw)?))
}

/// Amplitude and decay rate of the Serre solitary wave.
pub fn serre_parameters(speed: f64, depth: f64, g: f64) -> Result<(f64, f64)> {
    let a = speed * speed / g - depth;
    if !(a > 0.0) {
        return Err(Error::Domain(format!(
            "speed {speed} is not supercritical (sqrt(g D0) = {})",
            (g * depth).sqrt()
        )));
    }
    Ok((a, (3.0 * a / (4.0 * depth * depth * (depth + a))).sqrt()))
}

fn block_operator(space: &FeSpace, params: &ModelParams, cfg: &PetviashviliConfig) -> CsrMatrix {
    let n = space.n_dofs();
    let deg = space.default_quadrature_degree();
    let m = assemble_mass(space, None);
    let s = assemble_stiffness(space, None);
    let s_xi = assemble_tensor_stiffness(space, None, [1.0, 0.0, 0.0], deg);
    let (cs, d0, g) = (cfg.speed, cfg.depth, params.g);
    let bd = params.b * d0 * d0;
    let cd = params.c * d0 * d0;
    let mut trip = Vec::with_capacity(4 * m.nnz());
    for i in 0..n {
        let (cols, mv) = m.row(i);
        let sv = s.row(i).1;
        let sxv = s_xi.row(i).1;
        debug_assert_eq!(s.row(i).0, cols);
        for (k, &j) in cols.iter().enumerate() {
            trip.push((i, j, cs * (mv[k] + bd * sv[k])));
            trip.push((i, n + j, -d0 * mv[k]));
            trip.push((n + i, j, -g * (mv[k] + cd * sv[k])));
            trip.push((n + i, n + j, cs * (mv[k] + bd * sxv[k])));
        }
    }
    CsrMatrix::from_triplets(2 * n, 2 * n, &trip)
}

fn nonlinear_term(space: &FeSpace, eta: &[f64], w: &[f64]) -> Vec<f64> {
    let n = space.n_dofs();
    let tab = space.tabulate(3 * space.degree() + 1);
    let a = assemble_load_from(space, &tab, |t, q, _| eval_at(space, &tab, eta, t, q).0 * eval_at(space, &tab, w, t, q).0);
    let b = assemble_load_from(space, &tab, |t, q, _| 0.5 * eval_at(space, &tab, w, t, q).0.powi(2));
    let mut out = a;
    out.extend_from_slice(&b);
    debug_assert_eq!(out.len(), 2 * n);
    out
}

/// Petviashvili iteration from the Serre guess.
pub fn petviashvili_solve(
    cfg: &PetviashviliConfig,
    params: &ModelParams,
    space: &Arc<FeSpace>,
) -> Result<TravelingWaveSolution> {
    cfg.validate()?;
    let guess = serre_initial_guess(cfg.speed, cfg.depth, params.g, space)?;
    petviashvili_from(cfg, params, space, guess)
}

/// Petviashvili iteration from a given `(η, w)` starting point.
pub fn petviashvili_from(
    cfg: &PetviashviliConfig,
    params: &ModelParams,
    space: &Arc<FeSpace>,
    guess: (Vec<f64>, Vec<f64>),
) -> Result<TravelingWaveSolution> {
    cfg.validate()?;
    let n = space.n_dofs();
    let op = block_operator(space, params, cfg);
    let lu = BandedLu::factor(&op)?;
    let mut z = guess.0;
    z.extend_from_slice(&guess.1);
    let (mut residuals, mut multipliers) = (Vec::new(), Vec::new());
    let mut iterations = 0;
    loop {
        let nl = nonlinear_term(space, &z[..n], &z[n..]);
        let lz = op.matvec(&z);
        let num = crate::linalg::dot(&z, &lz);
        let den = crate::linalg::dot(&z, &nl);
        // The transverse block contributes (w̃, w̃) = 0 because w̃ ≡ 0.
        let norm = norm2(&z);
        if den.abs() < 1e-14 || norm == 0.0 {
            return Err(Error::Petviashvili(format!(
                "degenerate iterate at step {iterations}: (N(w), w) = {den:e}"
            )));
        }
        let m = num / den;
        let residual = (num - den).abs() / norm;
        residuals.push(residual);
        multipliers.push(m);
        debug!("petviashvili iteration {iterations}: m = {m:.12}, residual = {residual:e}");
        if residual < cfg.tolerance {
            break;
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::Petviashvili(format!(
                "no convergence in {} iterations; residual history {:?}",
                cfg.max_iterations, residuals
            )));
        }
        let scale = m.powf(cfg.exponent);
        let rhs: Vec<f64> = nl.iter().map(|v| scale * v).collect();
        z = lu.solve(&rhs);
        iterations += 1;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::Petviashvili(format!("non-finite iterate at step {iterations}")));
        }
    }
    if residuals.len() > 3 && residuals[2..].windows(2).any(|w| w[1] > w[0]) {
        warn!("petviashvili residual was not monotone: {residuals:?}");
    }
    let w = z.split_off(n);
    Ok(TravelingWaveSolution {
        space: space.clone(),
        eta: z,
        w,
        w_transverse: vec![0.0; n],
        residuals,
        multipliers,
        iterations,
        speed: cfg.speed,
        depth: cfg.depth,
    })
}

/// Speed of the numerical solitary wave with the requested amplitude, by a
/// secant search over Petviashvili solves.
pub fn speed_for_amplitude(
    amplitude: f64,
    cfg: &PetviashviliConfig,
    params: &ModelParams,
    space: &Arc<FeSpace>,
) -> Result<TravelingWaveSolution> {
    let g = params.g;
    let d0 = cfg.depth;
    let solve = |c: f64| petviashvili_solve(&PetviashviliConfig { speed: c, ..*cfg }, params, space);
    let mut c0 = (g * (d0 + amplitude)).sqrt();
    let mut s0 = solve(c0)?;
    let mut f0 = s0.amplitude() - amplitude;
    let mut c1 = c0 * (1.0 + 0.05 * amplitude / d0);
    for it in 0..30 {
        let s1 = solve(c1)?;
        let f1 = s1.amplitude() - amplitude;
        debug!("amplitude search {it}: c = {c1}, amplitude = {}", s1.amplitude());
        if f1.abs() <= 1e-10 * amplitude.max(1e-300) || (c1 - c0).abs() <= 1e-13 * c1 {
            return Ok(s1);
        }
        let c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
        if !(c2 > (g * d0).sqrt()) {
            return Err(Error::Petviashvili(format!("amplitude search left the supercritical range (c = {c2})")));
        }
        (c0, f0, s0) = (c1, f1, s1);
        c1 = c2;
    }
    let _ = s0;
    Err(Error::Petviashvili(format!("amplitude search for A = {amplitude} did not converge")))
}

/// Neumann potential with `∇φ ≈ u0`, shifted so its minimum nodal value is 0.
pub fn initial_potential(space: &Arc<FeSpace>, u0: &VectorField) -> Result<FeFunction> {
    let stiffness = assemble_stiffness(space, None);
    let tab = space.tabulate(2 * space.degree() + 4);
    let mut load = vec![0.0; space.n_dofs()];
    for t in 0..space.n_cells() {
        let geo = space.geometry(t);
        let dofs = space.cell_dofs(t);
        for (q, &lam) in tab.quadrature.points.iter().enumerate() {
            let u = u0.value(geo.map(lam));
            let w = geo.area * tab.quadrature.weights[q];
            for (&i, dl) in dofs.iter().zip(tab.dlambda_at(q)) {
                let g = geo.gradient(*dl);
                load[i] += w * (u[0] * g[0] + u[1] * g[1]);
            }
        }
    }
    let cfg = SolverConfig {
        max_iterations: 50 * space.n_dofs().max(100),
        ..SolverConfig::neumann()
    };
    let solver = SpdSolver::new(stiffness, cfg)?;
    let mut phi = solver.solve(&load)?;
    let min = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    if min.is_finite() {
        phi.iter_mut().for_each(|v| *v -= min);
    }
    Ok(FeFunction::new(space.clone(), phi))
}

/// Parameters of the modulated wavetrain used over the submerged bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavetrainParams {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub x0: f64,
    pub x1: f64,
    pub depth: f64,
    /// Multiplier of the bracket in the velocity formula; `g / D0` by default.
    pub velocity_factor: Option<f64>,
}

impl Default for WavetrainParams {
    fn default() -> Self {
        WavetrainParams {
            amplitude: 0.01,
            wavenumber: 1.67,
            x0: 3.6,
            x1: 60.0,
            depth: 0.4,
            velocity_factor: None,
        }
    }
}

impl WavetrainParams {
    /// `η, η_x, η_xx` at `x`.
    pub fn eta_derivatives(&self, x: f64) -> [f64; 3] {
        let (a, k) = (self.amplitude, self.wavenumber);
        let ph = k * (x - self.x0);
        let c = [ph.cos(), -k * ph.sin(), -k * k * ph.cos()];
        let (t1, t2) = (x.tanh(), (x + self.x1).tanh());
        let (s1, s2) = (1.0 - t1 * t1, 1.0 - t2 * t2);
        let e1 = [1.0 - t1, -s1, 2.0 * t1 * s1];
        let e2 = [1.0 + t2, s2, -2.0 * t2 * s2];
        let f = 0.25 * a;
        [
            f * c[0] * e1[0] * e2[0],
            f * (c[1] * e1[0] * e2[0] + c[0] * e1[1] * e2[0] + c[0] * e1[0] * e2[1]),
            f * (c[2] * e1[0] * e2[0]
                + c[0] * e1[2] * e2[0]
                + c[0] * e1[0] * e2[2]
                + 2.0 * (c[1] * e1[1] * e2[0] + c[1] * e1[0] * e2[1] + c[0] * e1[1] * e2[1])),
        ]
    }
}

/// Initial elevation and unidirectional velocity of the bar wavetrain.
pub fn bar_wavetrain(params: &ModelParams, train: &WavetrainParams) -> (ScalarField, VectorField) {
    let (t1, t2) = (*train, *train);
    let eta = ScalarField::new(move |x: Point| t1.eta_derivatives(x[0])[0]).with_gradient(move |x: Point| {
        [t2.eta_derivatives(x[0])[1], 0.0]
    });
    let (g, c, d0) = (params.g, params.c, train.depth);
    let factor = train.velocity_factor.unwrap_or(g / d0);
    let t3 = *train;
    let u = VectorField::new(move |x: Point| {
        let [e, _, exx] = t3.eta_derivatives(x[0]);
        [factor * (e - e * e / (4.0 * d0) - c * d0 * d0 * exx), 0.0]
    });
    (eta, u)
}
