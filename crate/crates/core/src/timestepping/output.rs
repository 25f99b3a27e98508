use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{FeFunction, FeSpace};
use crate::mesh::Point;

/// One row of the conservation log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub vorticity: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConservationLog {
    pub rows: Vec<ConservationRow>,
}

impl ConservationLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,energy,vorticity,gamma\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.mass, r.energy, r.vorticity, r.gamma
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv())
    }

    /// Largest `|q(t) − q(0)|` for the selected column.
    pub fn max_drift(&self, column: impl Fn(&ConservationRow) -> f64) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let q0 = column(first);
        self.rows.iter().map(|r| (column(r) - q0).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_vorticity(&self) -> f64 {
        self.rows.iter().map(|r| r.vorticity.abs()).fold(0.0, f64::max)
    }

    /// Largest `|γ − 1|` over steps (the initial row is excluded).
    pub fn max_gamma_deviation(&self) -> f64 {
        self.rows.iter().skip(1).map(|r| (r.gamma - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Elevation time series at a fixed location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeRecord {
    pub id: String,
    pub location: Point,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl GaugeRecord {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,eta\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t:.16e},{v:.16e}");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv())
    }

    /// Linear interpolation in time; `None` outside the recorded range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let ts = &self.times;
        if ts.is_empty() || t < ts[0] || t > *ts.last().unwrap() {
            return None;
        }
        let k = ts.partition_point(|&s| s < t);
        if k == 0 {
            return Some(self.values[0]);
        }
        let (t0, t1) = (ts[k - 1], ts[k]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        Some(self.values[k - 1] * (1.0 - w) + self.values[k] * w)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Legacy ASCII VTK snapshot of vertex values of η and φ, with the velocity
/// taken as the area-weighted average of cell-mean gradients around each
/// vertex.
pub fn vtk_snapshot(space: &Arc<FeSpace>, eta: &[f64], phi: &[f64], title: &str) -> String {
    let mesh = space.mesh();
    let nv = mesh.n_vertices();
    let nt = mesh.n_triangles();
    let mut vel = vec![[0.0; 2]; nv];
    let mut weight = vec![0.0; nv];
    let centroid = [1.0 / 3.0; 3];
    let f = FeFunction::new(space.clone(), phi.to_vec());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        // Cell mean of a P1 gradient is exact at any point; for P2 the
        // centroid value equals the cell mean.
        let g = f.grad_in_cell(t, centroid);
        let a = space.geometry(t).area;
        for &v in tri {
            vel[v][0] += a * g[0];
            vel[v][1] += a * g[1];
            weight[v] += a;
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or("snapshot"));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for tri in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    for (name, values) in [("eta", eta), ("phi", phi)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &values[..nv] {
            let _ = writeln!(s, "{v:.16e}");
        }
    }
    let _ = writeln!(s, "VECTORS velocity double");
    for (v, w) in vel.iter().zip(&weight) {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", v[0] / w, v[1] / w);
    }
    s
}

pub fn write_vtk(path: impl AsRef<Path>, space: &Arc<FeSpace>, eta: &[f64], phi: &[f64], title: &str) -> Result<()> {
    write_file(path.as_ref(), &vtk_snapshot(space, eta, phi, title))
}
