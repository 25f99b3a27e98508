//! Bona–Smith system parameters, linear dispersion and exact solitary waves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{ScalarField, VectorField};
use crate::mesh::Point;

/// Gravity and the dispersion coefficients of one member of the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub theta_sq: f64,
    pub b: f64,
    pub c: f64,
}

pub fn params_from_theta(theta_sq: f64, g: f64) -> Result<ModelParams> {
    if !(2.0 / 3.0..=1.0).contains(&theta_sq) || !theta_sq.is_finite() {
        return Err(Error::Domain(format!("theta^2 = {theta_sq} outside [2/3, 1]")));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Domain(format!("gravity g = {g} must be positive")));
    }
    Ok(ModelParams {
        g,
        theta_sq,
        b: (3.0 * theta_sq - 1.0) / 6.0,
        c: (3.0 * theta_sq - 2.0) / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta_sq: f64,
    pub mu: f64,
    pub nu: f64,
}

pub fn abcd_from_mu_nu(theta_sq: f64, mu: f64, nu: f64) -> AbcdCoefficients {
    let t = theta_sq;
    AbcdCoefficients {
        a: 0.5 * (1.0 / 3.0 - t) * mu,
        b: 0.5 * (t - 1.0 / 3.0) * (1.0 - mu),
        c: 0.5 * (t - 1.0) * nu,
        d: 0.5 * (1.0 - t) * (1.0 - nu),
        theta_sq,
        mu,
        nu,
    }
}

/// The Bona–Smith member of the abcd family: `μ = 0` and `ν` chosen so
/// that `b = d`. Undefined at `θ² = 1`.
pub fn abcd_bona_smith(theta_sq: f64) -> Result<AbcdCoefficients> {
    let denom = 3.0 * (1.0 - theta_sq);
    if denom == 0.0 {
        return Err(Error::Domain(
            "nu is singular at theta^2 = 1; use params_from_theta instead".into(),
        ));
    }
    Ok(abcd_from_mu_nu(theta_sq, 0.0, (4.0 - 6.0 * theta_sq) / denom))
}

/// Linear phase speed over `sqrt(g D0)` for the Bona–Smith system.
pub fn dispersion_bona_smith(params: &ModelParams, d0: f64, k: f64) -> f64 {
    let x2 = (d0 * k).powi(2);
    let den = 1.0 + params.b * x2;
    ((1.0 + params.c * x2) / (den * den)).sqrt()
}

/// Linear phase speed over `sqrt(g D0)` for the full water-wave problem.
pub fn dispersion_euler(d0: f64, k: f64) -> f64 {
    let x = d0 * k;
    if x.abs() < 1e-8 {
        // tanh(x)/x = 1 - x²/3 + ...
        return (1.0 - x * x / 3.0).sqrt();
    }
    (x.tanh() / x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub d0k: f64,
    pub bona_smith_ratio: f64,
    pub euler_ratio: f64,
}

/// `n + 1` equispaced samples of both relations for `k ∈ [0, k_max]`.
pub fn dispersion_table(params: &ModelParams, d0: f64, k_max: f64, n: usize) -> Vec<DispersionRow> {
    (0..=n)
        .map(|i| {
            let k = k_max * i as f64 / n.max(1) as f64;
            DispersionRow {
                d0k: d0 * k,
                bona_smith_ratio: dispersion_bona_smith(params, d0, k),
                euler_ratio: dispersion_euler(d0, k),
            }
        })
        .collect()
}

pub fn write_dispersion_csv(rows: &[DispersionRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "D0k,bona_smith_ratio,euler_ratio")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r.d0k, r.bona_smith_ratio, r.euler_ratio)?;
    }
    Ok(())
}

/// Closed-form line solitary wave over a flat bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitaryWave {
    pub amplitude: f64,
    pub decay: f64,
    pub speed: f64,
    /// Ratio of horizontal velocity to elevation.
    pub velocity_factor: f64,
    pub direction: [f64; 2],
    /// Crest sits at `direction·x = -shift` at `t = 0`.
    pub shift: f64,
    pub depth: f64,
    pub params: ModelParams,
}

pub fn analytic_solitary(
    theta_sq: f64,
    d0: f64,
    g: f64,
    direction: [f64; 2],
    shift: f64,
) -> Result<SolitaryWave> {
    let t = theta_sq;
    if !(t > 7.0 / 9.0 && t < 1.0) {
        return Err(Error::Domain(format!(
            "exact solitary waves need theta^2 in (7/9, 1); got {t} (the amplitude changes sign at 7/9)"
        )));
    }
    if !(d0 > 0.0) {
        return Err(Error::Domain(format!("depth D0 = {d0} must be positive")));
    }
    let norm = direction[0].hypot(direction[1]);
    if !(norm > 0.0) {
        return Err(Error::Domain("direction must be nonzero".into()));
    }
    let params = params_from_theta(t, g)?;
    Ok(SolitaryWave {
        amplitude: 4.5 * d0 * (t - 7.0 / 9.0) / (1.0 - t),
        // Follows from the general B-form; the decay scales as 1/D0.
        decay: 0.5 / d0 * (3.0 * (t - 7.0 / 9.0) / ((t - 2.0 / 3.0) * (t - 1.0 / 3.0))).sqrt(),
        speed: 4.0 * (g * d0).sqrt() * (t - 2.0 / 3.0) / (2.0 * (t - 1.0 / 3.0) * (1.0 - t)).sqrt(),
        velocity_factor: (2.0 * g / d0 * (1.0 - t) / (t - 1.0 / 3.0)).sqrt(),
        direction: [direction[0] / norm, direction[1] / norm],
        shift,
        depth: d0,
        params,
    })
}

impl SolitaryWave {
    /// Travelling coordinate `α·x − c_s t + shift`.
    pub fn phase(&self, x: Point, t: f64) -> f64 {
        self.direction[0] * x[0] + self.direction[1] * x[1] - self.speed * t + self.shift
    }

    pub fn profile(&self, xi: f64) -> f64 {
        let s = 1.0 / (self.decay * xi).cosh();
        self.amplitude * s * s
    }

    pub fn profile_derivative(&self, xi: f64) -> f64 {
        -2.0 * self.decay * self.profile(xi) * (self.decay * xi).tanh()
    }

    pub fn profile_second_derivative(&self, xi: f64) -> f64 {
        let (l, e) = (self.decay, self.profile(xi));
        4.0 * l * l * e - 6.0 * l * l * e * e / self.amplitude
    }

    pub fn eta(&self, x: Point, t: f64) -> f64 {
        self.profile(self.phase(x, t))
    }

    pub fn velocity(&self, x: Point, t: f64) -> [f64; 2] {
        let v = self.velocity_factor * self.eta(x, t);
        [self.direction[0] * v, self.direction[1] * v]
    }

    /// Potential with `∇φ = u`, vanishing far behind the wave.
    pub fn potential(&self, x: Point, t: f64) -> f64 {
        let xi = self.phase(x, t);
        self.velocity_factor * self.amplitude / self.decay * (1.0 + (self.decay * xi).tanh())
    }

    /// Total mass of the wave across a channel of the given width.
    pub fn channel_mass(&self, width: f64) -> f64 {
        2.0 * self.amplitude * width / self.decay
    }

    pub fn eta_field(&self, t: f64) -> ScalarField {
        let (w1, w2) = (*self, *self);
        ScalarField::new(move |x| w1.eta(x, t)).with_gradient(move |x| {
            let d = w2.profile_derivative(w2.phase(x, t));
            [w2.direction[0] * d, w2.direction[1] * d]
        })
    }

    pub fn velocity_field(&self, t: f64) -> VectorField {
        let w = *self;
        VectorField::new(move |x| w.velocity(x, t))
    }

    pub fn potential_field(&self, t: f64) -> ScalarField {
        let (w1, w2) = (*self, *self);
        ScalarField::new(move |x| w1.potential(x, t)).with_gradient(move |x| w2.velocity(x, t))
    }

    /// Residuals of the two steady travelling-wave equations at `xi`,
    /// with `w = B η`.
    pub fn ode_residual(&self, xi: f64) -> [f64; 2] {
        let (cs, d0) = (self.speed, self.depth);
        let ModelParams { g, b, c, .. } = self.params;
        let eta = self.profile(xi);
        let eta_xx = self.profile_second_derivative(xi);
        let w = self.velocity_factor * eta;
        let w_xx = self.velocity_factor * eta_xx;
        [
            -cs * eta + (d0 + eta) * w + cs * b * d0 * d0 * eta_xx,
            -cs * w + g * eta + 0.5 * w * w - c * g * d0 * d0 * eta_xx + cs * b * d0 * d0 * w_xx,
        ]
    }
}
