use super::assembly::eval_at;
use super::field::ScalarField;
use super::space::FeFunction;

/// Errors of a discrete function against an exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Gradient error in L², present when the exact gradient is known.
    pub h1_semi: Option<f64>,
}

impl ErrorNorms {
    /// Full H¹ norm `sqrt(‖e‖₀² + |e|₁²)`.
    pub fn h1(&self) -> Option<f64> {
        self.h1_semi.map(|s| (self.l2 * self.l2 + s * s).sqrt())
    }
}

/// `‖u_h − u‖₀` and `|u_h − u|₁` by quadrature of degree `2r + 6`.
pub fn error_norms(u_h: &FeFunction, exact: &ScalarField) -> ErrorNorms {
    let space = &u_h.space;
    let tab = space.tabulate(2 * space.degree() + 6);
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in 0..space.n_cells() {
        let geo = space.geometry(t);
        for (q, &lam) in tab.quadrature.points.iter().enumerate() {
            let w = geo.area * tab.quadrature.weights[q];
            let x = geo.map(lam);
            let (v, g) = eval_at(space, &tab, &u_h.coeffs, t, q);
            let e = v - exact.value(x);
            l2 += w * e * e;
            if let Some(ge) = exact.gradient(x) {
                let (dx, dy) = (g[0] - ge[0], g[1] - ge[1]);
                h1 += w * (dx * dx + dy * dy);
            }
        }
    }
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: exact.has_gradient().then(|| h1.sqrt()),
    }
}

/// `∫ u_h` over the domain.
pub fn integral(u_h: &FeFunction) -> f64 {
    let space = &u_h.space;
    let tab = space.tabulate(space.degree());
    let mut s = 0.0;
    for t in 0..space.n_cells() {
        let area = space.geometry(t).area;
        for q in 0..tab.quadrature.len() {
            s += area * tab.quadrature.weights[q] * eval_at(space, &tab, &u_h.coeffs, t, q).0;
        }
    }
    s
}
