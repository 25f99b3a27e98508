//! Manufactured solution on the unit square with a tilted bottom.
//!
//! `η = eᵗ cos 2πx cos 2πy`, `φ = eᵗ cos πx cos πy`, `D = 3/2 − (x + y)/20`.
//! Both satisfy the slip-wall conditions, so only volume sources are needed.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fem::ScalarField;
use crate::mesh::Point;
use crate::model::ModelParams;
use crate::semidiscrete::Forcing;

const DEPTH_MEAN: f64 = 1.5;
const DEPTH_SLOPE: f64 = -1.0 / 20.0;

pub fn mms_depth(p: Point) -> f64 {
    DEPTH_MEAN + DEPTH_SLOPE * (p[0] + p[1])
}

pub fn mms_bathymetry() -> ScalarField {
    ScalarField::new(mms_depth)
        .with_gradient(|_| [DEPTH_SLOPE, DEPTH_SLOPE])
        .with_bounds(DEPTH_MEAN - 0.1, DEPTH_MEAN)
}

/// Spatial factor with value, gradient and Laplacian.
#[derive(Debug, Clone, Copy)]
struct Mode {
    k: f64,
}

impl Mode {
    fn value(self, p: Point) -> f64 {
        (self.k * p[0]).cos() * (self.k * p[1]).cos()
    }
    fn gradient(self, p: Point) -> [f64; 2] {
        let (sx, cx) = (self.k * p[0]).sin_cos();
        let (sy, cy) = (self.k * p[1]).sin_cos();
        [-self.k * sx * cy, -self.k * cx * sy]
    }
    fn laplacian(self, p: Point) -> f64 {
        -2.0 * self.k * self.k * self.value(p)
    }
    /// `∇·(D² ∇f)`.
    fn weighted_laplacian(self, p: Point) -> f64 {
        let d = mms_depth(p);
        let g = self.gradient(p);
        2.0 * d * DEPTH_SLOPE * (g[0] + g[1]) + d * d * self.laplacian(p)
    }
}

const ELEVATION: Mode = Mode { k: 2.0 * PI };
const POTENTIAL: Mode = Mode { k: PI };

pub fn exact_eta(t: f64) -> ScalarField {
    let e = t.exp();
    ScalarField::new(move |p| e * ELEVATION.value(p)).with_gradient(move |p| {
        let g = ELEVATION.gradient(p);
        [e * g[0], e * g[1]]
    })
}

pub fn exact_phi(t: f64) -> ScalarField {
    let e = t.exp();
    ScalarField::new(move |p| e * POTENTIAL.value(p)).with_gradient(move |p| {
        let g = POTENTIAL.gradient(p);
        [e * g[0], e * g[1]]
    })
}

/// Spatial parts of the sources multiplying `eᵗ` and `e²ᵗ`.
pub struct MmsSources {
    pub eta_linear: ScalarField,
    pub eta_quadratic: ScalarField,
    pub phi_linear: ScalarField,
    pub phi_quadratic: ScalarField,
}

pub fn mms_sources(params: &ModelParams) -> MmsSources {
    let (g, b, c) = (params.g, params.b, params.c);
    let eta_linear = ScalarField::new(move |p| {
        let dg = [DEPTH_SLOPE, DEPTH_SLOPE];
        let gp = POTENTIAL.gradient(p);
        ELEVATION.value(p) - b * ELEVATION.weighted_laplacian(p)
            + dg[0] * gp[0]
            + dg[1] * gp[1]
            + mms_depth(p) * POTENTIAL.laplacian(p)
    });
    let eta_quadratic = ScalarField::new(|p| {
        let ge = ELEVATION.gradient(p);
        let gp = POTENTIAL.gradient(p);
        ge[0] * gp[0] + ge[1] * gp[1] + ELEVATION.value(p) * POTENTIAL.laplacian(p)
    });
    let phi_linear = ScalarField::new(move |p| {
        POTENTIAL.value(p) + g * ELEVATION.value(p)
            - c * g * ELEVATION.weighted_laplacian(p)
            - b * POTENTIAL.weighted_laplacian(p)
    });
    let phi_quadratic = ScalarField::new(|p| {
        let gp = POTENTIAL.gradient(p);
        0.5 * (gp[0] * gp[0] + gp[1] * gp[1])
    });
    MmsSources {
        eta_linear,
        eta_quadratic,
        phi_linear,
        phi_quadratic,
    }
}

/// Pointwise sources `(F_η, F_φ)` at `(x, t)`.
pub fn mms_source_at(sources: &MmsSources, p: Point, t: f64) -> [f64; 2] {
    let (e1, e2) = (t.exp(), (2.0 * t).exp());
    [
        e1 * sources.eta_linear.value(p) + e2 * sources.eta_quadratic.value(p),
        e1 * sources.phi_linear.value(p) + e2 * sources.phi_quadratic.value(p),
    ]
}

pub fn mms_forcing(params: &ModelParams) -> Forcing {
    let s = mms_sources(params);
    let lin: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f64::exp);
    let quad: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|t| (2.0 * t).exp());
    Forcing::Separable {
        eta: vec![(lin.clone(), s.eta_linear), (quad.clone(), s.eta_quadratic)],
        phi: vec![(lin, s.phi_linear), (quad, s.phi_quadratic)],
    }
}
