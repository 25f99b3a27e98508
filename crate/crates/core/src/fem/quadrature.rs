//! Quadrature on the reference triangle and on intervals.

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Triangle quadrature in barycentric coordinates with area-normalized
/// weights (they sum to 1; multiply by the element area).
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl Quadrature {
    /// Collapsed (conical) Gauss product rule exact for total degree `degree`.
    pub fn triangle(degree: usize) -> Self {
        // The Duffy map adds one power of the collapsed coordinate.
        let n = (degree + 3) / 2;
        let (x, w) = gauss_legendre(n.max(1));
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                let px = u;
                let py = v * (1.0 - u);
                points.push([1.0 - px - py, px, py]);
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Quadrature {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for d in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_rules_exact_on_monomials() {
        // ∫_T x^a y^b = a! b! / (a+b+2)!, normalized by |T| = 1/2.
        for degree in 0..=20 {
            let q = Quadrature::triangle(degree);
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2);
                    let approx: f64 = q
                        .points
                        .iter()
                        .zip(&q.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    assert!((approx - exact).abs() < 1e-14, "degree {degree}: x^{a} y^{b}");
                }
            }
        }
    }
}
