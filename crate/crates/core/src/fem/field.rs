use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;

type ValueFn = dyn Fn(Point) -> f64 + Send + Sync;
type GradFn = dyn Fn(Point) -> [f64; 2] + Send + Sync;

/// A scalar function of position with an optional analytic gradient.
///
/// Bathymetries carry their known depth bounds `0 < D_min ≤ D ≤ D_max` as
/// metadata.
#[derive(Clone)]
pub struct ScalarField {
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradFn>>,
    bounds: Option<(f64, f64)>,
    constant: Option<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("has_gradient", &self.gradient.is_some())
            .field("bounds", &self.bounds)
            .field("constant", &self.constant)
            .finish()
    }
}

impl ScalarField {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            value: Arc::new(f),
            gradient: None,
            bounds: None,
            constant: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField {
            value: Arc::new(move |_| c),
            gradient: Some(Arc::new(|_| [0.0, 0.0])),
            bounds: Some((c, c)),
            constant: Some(c),
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_bounds(mut self, min: f64, max: f64) -> Self {
        self.bounds = Some((min, max));
        self
    }

    #[inline]
    pub fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }

    pub fn gradient(&self, p: Point) -> Option<[f64; 2]> {
        self.gradient.as_ref().map(|g| g(p))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    /// Pointwise product, with gradient by the product rule when both
    /// factors supply one.
    pub fn product(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.clone(), other.clone());
        let mut out = ScalarField::new({
            let (a, b) = (a.clone(), b.clone());
            move |p| a.value(p) * b.value(p)
        });
        if a.has_gradient() && b.has_gradient() {
            out = out.with_gradient(move |p| {
                let (ga, gb) = (a.gradient(p).unwrap(), b.gradient(p).unwrap());
                let (va, vb) = (a.value(p), b.value(p));
                [ga[0] * vb + va * gb[0], ga[1] * vb + va * gb[1]]
            });
        }
        if let (Some(x), Some(y)) = (self.constant, other.constant) {
            out.constant = Some(x * y);
        }
        out
    }
}

/// A vector-valued field, used for initial velocities.
#[derive(Clone)]
pub struct VectorField(Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>);

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

impl VectorField {
    pub fn new(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        VectorField(Arc::new(f))
    }

    pub fn zero() -> Self {
        VectorField::new(|_| [0.0, 0.0])
    }

    #[inline]
    pub fn value(&self, p: Point) -> [f64; 2] {
        (self.0)(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_gradient_matches_finite_differences() {
        let a = ScalarField::new(|p| (p[0] * 2.0).sin()).with_gradient(|p| [2.0 * (p[0] * 2.0).cos(), 0.0]);
        let b = ScalarField::new(|p| p[0] * p[1] + 1.0).with_gradient(|p| [p[1], p[0]]);
        let c = a.product(&b);
        let p = [0.3, -0.7];
        let h = 1e-5;
        let fd = [
            (c.value([p[0] + h, p[1]]) - c.value([p[0] - h, p[1]])) / (2.0 * h),
            (c.value([p[0], p[1] + h]) - c.value([p[0], p[1] - h])) / (2.0 * h),
        ];
        let g = c.gradient(p).unwrap();
        assert!((g[0] - fd[0]).abs() < 1e-9 && (g[1] - fd[1]).abs() < 1e-9);
    }
}
