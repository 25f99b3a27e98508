use std::sync::Arc;

use super::field::ScalarField;
use super::quadrature::Quadrature;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Lagrange basis on one triangle in barycentric coordinates.
///
/// Local ordering: the three vertices, then the midpoints of the local
/// edges (0,1), (1,2), (2,0).
pub fn basis_values(degree: usize, lam: [f64; 3], out: &mut [f64]) {
    match degree {
        1 => out[..3].copy_from_slice(&lam),
        2 => {
            for a in 0..3 {
                out[a] = lam[a] * (2.0 * lam[a] - 1.0);
            }
            out[3] = 4.0 * lam[0] * lam[1];
            out[4] = 4.0 * lam[1] * lam[2];
            out[5] = 4.0 * lam[2] * lam[0];
        }
        _ => unreachable!("unsupported degree {degree}"),
    }
}

/// Partial derivatives of each basis function with respect to the three
/// barycentric coordinates.
pub fn basis_dlambda(degree: usize, lam: [f64; 3], out: &mut [[f64; 3]]) {
    match degree {
        1 => {
            out[0] = [1.0, 0.0, 0.0];
            out[1] = [0.0, 1.0, 0.0];
            out[2] = [0.0, 0.0, 1.0];
        }
        2 => {
            for a in 0..3 {
                out[a] = [0.0; 3];
                out[a][a] = 4.0 * lam[a] - 1.0;
            }
            out[3] = [4.0 * lam[1], 4.0 * lam[0], 0.0];
            out[4] = [0.0, 4.0 * lam[2], 4.0 * lam[1]];
            out[5] = [4.0 * lam[2], 0.0, 4.0 * lam[0]];
        }
        _ => unreachable!("unsupported degree {degree}"),
    }
}

pub fn local_dof_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Affine geometry of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub points: [Point; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(points: [Point; 3]) -> Self {
        let [a, b, c] = points;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let grad_lambda = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        ElementGeometry {
            points,
            area: 0.5 * det.abs(),
            grad_lambda,
        }
    }

    #[inline]
    pub fn map(&self, lam: [f64; 3]) -> Point {
        let [a, b, c] = self.points;
        [
            lam[0] * a[0] + lam[1] * b[0] + lam[2] * c[0],
            lam[0] * a[1] + lam[1] * b[1] + lam[2] * c[1],
        ]
    }

    /// Physical gradient from barycentric partial derivatives.
    #[inline]
    pub fn gradient(&self, d: [f64; 3]) -> [f64; 2] {
        let g = &self.grad_lambda;
        [
            d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
            d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
        ]
    }
}

/// Basis values and barycentric derivatives tabulated at quadrature points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub quadrature: Quadrature,
    pub n_local: usize,
    /// `values[q * n_local + k]`
    pub values: Vec<f64>,
    pub dlambda: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn new(degree: usize, quadrature: Quadrature) -> Self {
        let n_local = local_dof_count(degree);
        let nq = quadrature.len();
        let mut values = vec![0.0; nq * n_local];
        let mut dlambda = vec![[0.0; 3]; nq * n_local];
        for (q, &lam) in quadrature.points.iter().enumerate() {
            basis_values(degree, lam, &mut values[q * n_local..(q + 1) * n_local]);
            basis_dlambda(degree, lam, &mut dlambda[q * n_local..(q + 1) * n_local]);
        }
        Tabulation {
            quadrature,
            n_local,
            values,
            dlambda,
        }
    }

    #[inline]
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_local..(q + 1) * self.n_local]
    }

    #[inline]
    pub fn dlambda_at(&self, q: usize) -> &[[f64; 3]] {
        &self.dlambda[q * self.n_local..(q + 1) * self.n_local]
    }
}

/// Continuous Lagrange space of degree 1 or 2 on a triangulation.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    dof_coords: Vec<Point>,
    cell_dofs: Vec<usize>,
    n_local: usize,
    geometry: Vec<ElementGeometry>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::Domain(format!(
                "polynomial degree {degree} not supported (expected 1 or 2)"
            )));
        }
        let n_local = local_dof_count(degree);
        let nv = mesh.n_vertices();
        let mut dof_coords: Vec<Point> = mesh.vertices().to_vec();
        if degree == 2 {
            let v = mesh.vertices();
            dof_coords.extend(
                mesh.edges()
                    .iter()
                    .map(|e| [0.5 * (v[e[0]][0] + v[e[1]][0]), 0.5 * (v[e[0]][1] + v[e[1]][1])]),
            );
        }
        let mut cell_dofs = Vec::with_capacity(mesh.n_triangles() * n_local);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            cell_dofs.extend_from_slice(tri);
            if degree == 2 {
                cell_dofs.extend(mesh.triangle_edges()[t].iter().map(|e| nv + e));
            }
        }
        let geometry = (0..mesh.n_triangles())
            .map(|t| ElementGeometry::new(mesh.triangle_points(t)))
            .collect();
        Ok(FeSpace {
            mesh,
            degree,
            dof_coords,
            cell_dofs,
            n_local,
            geometry,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_cells(&self) -> usize {
        self.geometry.len()
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    #[inline]
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        &self.cell_dofs[t * self.n_local..(t + 1) * self.n_local]
    }

    #[inline]
    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn tabulate(&self, quadrature_degree: usize) -> Tabulation {
        Tabulation::new(self.degree, Quadrature::triangle(quadrature_degree))
    }

    /// Default assembly quadrature degree, `2r + 3`.
    pub fn default_quadrature_degree(&self) -> usize {
        2 * self.degree + 3
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: &ScalarField) -> Vec<f64> {
        self.dof_coords.iter().map(|&p| f.value(p)).collect()
    }

    /// Row pattern of the global matrices: all dof pairs sharing a cell.
    pub fn sparsity(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n_dofs()];
        for t in 0..self.n_cells() {
            let dofs = self.cell_dofs(t);
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        rows
    }
}

/// A function in an [`FeSpace`], stored by its nodal coefficients.
#[derive(Debug, Clone)]
pub struct FeFunction {
    pub space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(space.n_dofs(), coeffs.len(), "coefficient length mismatch");
        FeFunction { space, coeffs }
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        FeFunction::new(space, vec![0.0; n])
    }

    pub fn interpolate(space: Arc<FeSpace>, f: &ScalarField) -> Self {
        let c = space.interpolate(f);
        FeFunction::new(space, c)
    }

    pub fn eval_in_cell(&self, t: usize, lam: [f64; 3]) -> f64 {
        let mut psi = [0.0; 6];
        basis_values(self.space.degree, lam, &mut psi);
        self.space
            .cell_dofs(t)
            .iter()
            .zip(&psi)
            .map(|(&i, p)| self.coeffs[i] * p)
            .sum()
    }

    pub fn grad_in_cell(&self, t: usize, lam: [f64; 3]) -> [f64; 2] {
        let mut d = [[0.0; 3]; 6];
        basis_dlambda(self.space.degree, lam, &mut d);
        let geo = self.space.geometry(t);
        let mut g = [0.0; 2];
        for (&i, dk) in self.space.cell_dofs(t).iter().zip(&d) {
            let gk = geo.gradient(*dk);
            g[0] += self.coeffs[i] * gk[0];
            g[1] += self.coeffs[i] * gk[1];
        }
        g
    }

    /// Point evaluation; `None` outside the mesh.
    pub fn eval(&self, p: Point) -> Option<f64> {
        self.space
            .mesh()
            .locate_point(p)
            .map(|(t, lam)| self.eval_in_cell(t, lam))
    }

    pub fn gradient(&self, p: Point) -> Option<[f64; 2]> {
        self.space
            .mesh()
            .locate_point(p)
            .map(|(t, lam)| self.grad_in_cell(t, lam))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiagonalRule;

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::rectangle([0.0, 1.0], [0.0, 1.0], n, n, DiagonalRule::Right).unwrap())
    }

    #[test]
    fn dof_counts() {
        let mesh = square(3);
        let p1 = FeSpace::new(mesh.clone(), 1).unwrap();
        let p2 = FeSpace::new(mesh.clone(), 2).unwrap();
        assert_eq!(p1.n_dofs(), mesh.n_vertices());
        assert_eq!(p2.n_dofs(), mesh.n_vertices() + mesh.edges().len());
        assert!(FeSpace::new(mesh, 5).is_err());
    }

    #[test]
    fn lagrange_property() {
        let sp = Arc::new(FeSpace::new(square(2), 2).unwrap());
        for i in 0..sp.n_dofs() {
            let mut c = vec![0.0; sp.n_dofs()];
            c[i] = 1.0;
            let f = FeFunction::new(sp.clone(), c);
            for (j, &p) in sp.dof_coords().iter().enumerate() {
                let v = f.eval(p).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "dof {i} at node {j}: {v}");
            }
        }
    }

    #[test]
    fn shared_dofs_are_continuous() {
        let sp = Arc::new(FeSpace::new(square(3), 2).unwrap());
        let c: Vec<f64> = (0..sp.n_dofs()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let f = FeFunction::new(sp.clone(), c);
        let mesh = sp.mesh();
        // Evaluate from both sides of every interior edge at a few points.
        let mut owners: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (t, es) in mesh.triangle_edges().iter().enumerate() {
            for &e in es {
                owners.entry(e).or_default().push(t);
            }
        }
        for (e, ts) in owners {
            if ts.len() != 2 {
                continue;
            }
            let [a, b] = mesh.edges()[e];
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            for s in [0.2, 0.5, 0.9] {
                let p = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let v0 = f.eval_in_cell(ts[0], mesh.barycentric(ts[0], p));
                let v1 = f.eval_in_cell(ts[1], mesh.barycentric(ts[1], p));
                assert!((v0 - v1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratics_reproduced_with_gradient() {
        let sp = Arc::new(FeSpace::new(square(2), 2).unwrap());
        let f = FeFunction::interpolate(sp, &ScalarField::new(|p| 1.0 + p[0] - 2.0 * p[0] * p[1] + p[1] * p[1]));
        let p = [0.31, 0.77];
        assert!((f.eval(p).unwrap() - (1.0 + 0.31 - 2.0 * 0.31 * 0.77 + 0.77 * 0.77)).abs() < 1e-13);
        let g = f.gradient(p).unwrap();
        assert!((g[0] - (1.0 - 2.0 * 0.77)).abs() < 1e-12);
        assert!((g[1] - (-2.0 * 0.31 + 2.0 * 0.77)).abs() < 1e-12);
    }
}
