//! Conforming triangulations of polygonal domains.
//!
//! A [`Mesh`] is immutable once built. Construction fixes triangle
//! orientation, derives the edge list (used for P2 degrees of freedom) and
//! the boundary edges, and validates conformity.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRule {
    /// Every cell split along its lower-left to upper-right diagonal.
    Right,
    /// Every cell split along its lower-right to upper-left diagonal.
    Left,
    /// Diagonals alternate in a checkerboard pattern.
    UnionJack,
    /// Both diagonals, through an added centre vertex; four triangles per cell.
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    Msh2Ascii,
    SimpleTri,
}

impl MeshFormat {
    /// Guess the format from a file extension (`.msh` or anything else).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("msh") => MeshFormat::Msh2Ascii,
            _ => MeshFormat::SimpleTri,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    /// Unique edges, sorted lexicographically with `e[0] < e[1]`.
    edges: Vec<[usize; 2]>,
    /// Edge index of the local edges (0,1), (1,2), (2,0) of each triangle.
    triangle_edges: Vec<[usize; 3]>,
    bboxes: Vec<[f64; 4]>,
    h_max: f64,
    h_min: f64,
}

/// Twice the signed area of the triangle (a, b, c).
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl Mesh {
    /// Build a mesh from raw vertex and triangle lists.
    ///
    /// Clockwise triangles are flipped. Degenerate triangles, out-of-range
    /// indices and edges shared by more than two triangles are rejected.
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::MeshValidation("mesh has no vertices or no triangles".into()));
        }
        let nv = vertices.len();
        let mut bad = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                bad.push(format!("triangle {t} references missing vertex {v}"));
            } else if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                bad.push(format!("triangle {t} has repeated vertices {tri:?}"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::MeshValidation(bad.join("; ")));
        }

        let mut bboxes = Vec::with_capacity(triangles.len());
        let mut h_max: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for (t, tri) in triangles.iter_mut().enumerate() {
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area2 = orient(a, b, c);
            let scale = [a, b, c]
                .iter()
                .flat_map(|p| p.iter())
                .fold(0.0_f64, |m, x| m.max(x.abs()))
                .max(1.0);
            if area2.abs() <= 1e-14 * scale * scale {
                return Err(Error::MeshValidation(format!("triangle {t} is degenerate")));
            }
            if area2 < 0.0 {
                tri.swap(1, 2);
            }
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                h_max = h_max.max(len);
                h_min = h_min.min(len);
            }
            bboxes.push([
                a[0].min(b[0]).min(c[0]),
                a[0].max(b[0]).max(c[0]),
                a[1].min(b[1]).min(c[1]),
                a[1].max(b[1]).max(c[1]),
            ]);
        }

        // edge -> (count, first directed occurrence)
        let mut edge_map: HashMap<[usize; 2], (usize, [usize; 2])> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                let key = [p.min(q), p.max(q)];
                let entry = edge_map.entry(key).or_insert((0, [p, q]));
                entry.0 += 1;
            }
        }
        let mut offending: Vec<String> = edge_map
            .iter()
            .filter(|(_, (n, _))| *n > 2)
            .map(|(e, (n, _))| format!("edge {e:?} shared by {n} triangles"))
            .collect();
        if !offending.is_empty() {
            offending.sort();
            return Err(Error::MeshValidation(offending.join("; ")));
        }

        let mut edges: Vec<[usize; 2]> = edge_map.keys().copied().collect();
        edges.sort_unstable();
        let edge_index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let triangle_edges = triangles
            .iter()
            .map(|tri| {
                let mut out = [0; 3];
                for k in 0..3 {
                    let (p, q) = (tri[k], tri[(k + 1) % 3]);
                    out[k] = edge_index[&[p.min(q), p.max(q)]];
                }
                out
            })
            .collect();
        let mut boundary_edges: Vec<[usize; 2]> = edges
            .iter()
            .filter_map(|e| {
                let (n, dir) = edge_map[e];
                (n == 1).then_some(dir)
            })
            .collect();
        boundary_edges.sort_unstable();

        // Closed loops: every boundary vertex has as many outgoing as incoming edges.
        let mut balance: HashMap<usize, i64> = HashMap::new();
        for &[p, q] in &boundary_edges {
            *balance.entry(p).or_default() += 1;
            *balance.entry(q).or_default() -= 1;
        }
        let mut open: Vec<usize> = balance.iter().filter(|(_, b)| **b != 0).map(|(v, _)| *v).collect();
        if !open.is_empty() {
            open.sort_unstable();
            return Err(Error::MeshValidation(format!(
                "boundary is not a union of closed loops at vertices {open:?}"
            )));
        }

        Ok(Mesh {
            vertices,
            triangles,
            boundary_edges,
            edges,
            triangle_edges,
            bboxes,
            h_max,
            h_min,
        })
    }

    /// Structured triangulation of `x_range × y_range` with `nx × ny` cells.
    pub fn rectangle(
        x_range: [f64; 2],
        y_range: [f64; 2],
        nx: usize,
        ny: usize,
        rule: DiagonalRule,
    ) -> Result<Self> {
        let valid = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[1] > r[0];
        if !valid(x_range) || !valid(y_range) {
            return Err(Error::InvalidGeometry(format!(
                "degenerate rectangle {x_range:?} x {y_range:?}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGeometry("nx and ny must be at least 1".into()));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            let y = y_range[0] + (y_range[1] - y_range[0]) * j as f64 / ny as f64;
            for i in 0..=nx {
                let x = x_range[0] + (x_range[1] - x_range[0]) * i as f64 / nx as f64;
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(4 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                let positive = match rule {
                    DiagonalRule::Right => true,
                    DiagonalRule::Left => false,
                    DiagonalRule::UnionJack => (i + j) % 2 == 0,
                    DiagonalRule::Crossed => {
                        let (a, b) = (vertices[v00], vertices[v11]);
                        let c = vertices.len();
                        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                        triangles.extend([[v00, v10, c], [v10, v11, c], [v11, v01, c], [v01, v00, c]]);
                        continue;
                    }
                };
                if positive {
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                } else {
                    triangles.push([v00, v10, v01]);
                    triangles.push([v10, v11, v01]);
                }
            }
        }
        Mesh::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// V − E + T.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Boundary loops as ordered vertex cycles. Outer loops run
    /// counterclockwise, holes clockwise.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for &[p, q] in &self.boundary_edges {
            next.entry(p).or_default().push(q);
        }
        let mut loops = Vec::new();
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            while let Some(first) = next.get_mut(&s).and_then(|v| v.pop()) {
                let mut cycle = vec![s];
                let mut cur = first;
                while cur != s {
                    cycle.push(cur);
                    cur = match next.get_mut(&cur).and_then(|v| v.pop()) {
                        Some(n) => n,
                        None => break,
                    };
                }
                loops.push(cycle);
            }
        }
        loops
    }

    /// Sum of signed shoelace areas of the boundary loops; equals the domain
    /// area for a valid mesh.
    pub fn boundary_polygon_area(&self) -> f64 {
        self.boundary_loops()
            .iter()
            .map(|cycle| {
                let n = cycle.len();
                0.5 * (0..n)
                    .map(|i| {
                        let p = self.vertices[cycle[i]];
                        let q = self.vertices[cycle[(i + 1) % n]];
                        p[0] * q[1] - q[0] * p[1]
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Find the triangle containing `p`.
    ///
    /// Returns the lowest-index triangle whose barycentric coordinates are
    /// all ≥ −1e-10, together with those coordinates (summing to one).
    pub fn locate_point(&self, p: Point) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-10;
        for (t, bb) in self.bboxes.iter().enumerate() {
            let pad = TOL * (bb[1] - bb[0]).max(bb[3] - bb[2]);
            if p[0] < bb[0] - pad || p[0] > bb[1] + pad || p[1] < bb[2] - pad || p[1] > bb[3] + pad {
                continue;
            }
            let bary = self.barycentric(t, p);
            if bary.iter().all(|&l| l >= -TOL) {
                return Some((t, bary));
            }
        }
        None
    }

    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        let det = orient(a, b, c);
        let l1 = orient(p, b, c) / det;
        let l2 = orient(a, p, c) / det;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Stable hash of vertex coordinates and connectivity, used in run manifests.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in &self.vertices {
            hasher.update(v[0].to_le_bytes());
            hasher.update(v[1].to_le_bytes());
        }
        for t in &self.triangles {
            for v in t {
                hasher.update((*v as u64).to_le_bytes());
            }
        }
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    pub fn read(path: impl AsRef<Path>, format: MeshFormat) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match format {
            MeshFormat::SimpleTri => parse_simple_tri(&text, path),
            MeshFormat::Msh2Ascii => parse_msh2(&text, path),
        }
    }

    pub fn from_str_format(text: &str, format: MeshFormat) -> Result<Self> {
        let path = Path::new("<memory>");
        match format {
            MeshFormat::SimpleTri => parse_simple_tri(text, path),
            MeshFormat::Msh2Ascii => parse_msh2(text, path),
        }
    }

    pub fn to_simple_tri(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(out, "{:e} {:e}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{} {}", e[0], e[1]);
        }
        out
    }

    pub fn to_msh2(&self) -> String {
        let mut out = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
        let _ = writeln!(out, "{}", self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{} {:e} {:e} 0", i + 1, v[0], v[1]);
        }
        out.push_str("$EndNodes\n$Elements\n");
        let _ = writeln!(out, "{}", self.boundary_edges.len() + self.triangles.len());
        let mut id = 1;
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{id} 1 2 1 1 {} {}", e[0] + 1, e[1] + 1);
            id += 1;
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{id} 2 2 2 1 {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            id += 1;
        }
        out.push_str("$EndElements\n");
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
        let path = path.as_ref();
        let text = match format {
            MeshFormat::SimpleTri => self.to_simple_tri(),
            MeshFormat::Msh2Ascii => self.to_msh2(),
        };
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Every listed edge must be a topological boundary edge.
    fn check_declared_boundary(self, declared: &[[usize; 2]]) -> Result<Self> {
        let known: std::collections::HashSet<[usize; 2]> = self
            .boundary_edges
            .iter()
            .map(|e| [e[0].min(e[1]), e[0].max(e[1])])
            .collect();
        let bad: Vec<String> = declared
            .iter()
            .filter(|e| !known.contains(&[e[0].min(e[1]), e[0].max(e[1])]))
            .map(|e| format!("{e:?}"))
            .collect();
        if bad.is_empty() {
            Ok(self)
        } else {
            Err(Error::MeshValidation(format!(
                "declared boundary edges are interior or absent: {}",
                bad.join(", ")
            )))
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_simple_tri(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    fn numbers<T: std::str::FromStr>(path: &Path, line: usize, s: &str, n: usize) -> Result<Vec<T>> {
        let out: std::result::Result<Vec<T>, _> = s.split_whitespace().map(str::parse).collect();
        match out {
            Ok(v) if v.len() == n => Ok(v),
            Ok(v) => Err(parse_err(path, line, format!("expected {n} fields, found {}", v.len()))),
            Err(_) => Err(parse_err(path, line, format!("could not parse `{s}`"))),
        }
    }

    let (ln, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let counts: Vec<usize> = numbers(path, ln, header, 3)?;
    let (nv, nt, nb) = (counts[0], counts[1], counts[2]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(path, ln, "unexpected end of vertex block"))?;
        let v: Vec<f64> = numbers(path, ln, l, 2)?;
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(path, ln, "unexpected end of triangle block"))?;
        let t: Vec<usize> = numbers(path, ln, l, 3)?;
        triangles.push([t[0], t[1], t[2]]);
    }
    let mut declared = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(path, ln, "unexpected end of boundary block"))?;
        let e: Vec<usize> = numbers(path, ln, l, 2)?;
        declared.push([e[0], e[1]]);
    }
    Mesh::new(vertices, triangles)?.check_declared_boundary(&declared)
}

fn parse_msh2(text: &str, path: &Path) -> Result<Mesh> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut lines_declared = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (ln, l) = lines[i];
        match l {
            "$MeshFormat" => {
                let (fl, f) = *lines.get(i + 1).ok_or_else(|| parse_err(path, ln, "truncated $MeshFormat"))?;
                if !f.starts_with('2') {
                    return Err(parse_err(path, fl, format!("unsupported MSH version `{f}`")));
                }
                if f.split_whitespace().nth(1) != Some("0") {
                    return Err(parse_err(path, fl, "binary MSH files are not supported"));
                }
                i += 2;
            }
            "$Nodes" => {
                let (cl, c) = *lines.get(i + 1).ok_or_else(|| parse_err(path, ln, "truncated $Nodes"))?;
                let n: usize = c.parse().map_err(|_| parse_err(path, cl, "bad node count"))?;
                for k in 0..n {
                    let (nl, s) = *lines.get(i + 2 + k).ok_or_else(|| parse_err(path, cl, "truncated $Nodes"))?;
                    let f: Vec<&str> = s.split_whitespace().collect();
                    if f.len() < 3 {
                        return Err(parse_err(path, nl, "node line needs id x y [z]"));
                    }
                    let id: u64 = f[0].parse().map_err(|_| parse_err(path, nl, "bad node id"))?;
                    let x: f64 = f[1].parse().map_err(|_| parse_err(path, nl, "bad x coordinate"))?;
                    let y: f64 = f[2].parse().map_err(|_| parse_err(path, nl, "bad y coordinate"))?;
                    node_index.insert(id, vertices.len());
                    vertices.push([x, y]);
                }
                i += 2 + n;
            }
            "$Elements" => {
                let (cl, c) = *lines.get(i + 1).ok_or_else(|| parse_err(path, ln, "truncated $Elements"))?;
                let n: usize = c.parse().map_err(|_| parse_err(path, cl, "bad element count"))?;
                for k in 0..n {
                    let (el, s) = *lines.get(i + 2 + k).ok_or_else(|| parse_err(path, cl, "truncated $Elements"))?;
                    let f: std::result::Result<Vec<u64>, _> = s.split_whitespace().map(str::parse).collect();
                    let f = f.map_err(|_| parse_err(path, el, "bad element line"))?;
                    if f.len() < 3 {
                        return Err(parse_err(path, el, "element line too short"));
                    }
                    let (kind, ntags) = (f[1], f[2] as usize);
                    let nodes = &f[(3 + ntags).min(f.len())..];
                    let lookup = |id: u64| {
                        node_index
                            .get(&id)
                            .copied()
                            .ok_or_else(|| parse_err(path, el, format!("element references unknown node {id}")))
                    };
                    match kind {
                        1 if nodes.len() == 2 => lines_declared.push([lookup(nodes[0])?, lookup(nodes[1])?]),
                        2 if nodes.len() == 3 => {
                            triangles.push([lookup(nodes[0])?, lookup(nodes[1])?, lookup(nodes[2])?])
                        }
                        1 | 2 => return Err(parse_err(path, el, "wrong node count for element type")),
                        _ => {}
                    }
                }
                i += 2 + n;
            }
            _ if l.starts_with('$') && !l.starts_with("$End") => {
                // Skip unknown sections.
                let end = format!("$End{}", &l[1..]);
                i += 1;
                while i < lines.len() && lines[i].1 != end {
                    i += 1;
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    if vertices.is_empty() {
        return Err(parse_err(path, 1, "no $Nodes section"));
    }
    // Isolated nodes (e.g. geometry points) are dropped.
    let mut used = vec![false; vertices.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (v, &u) in used.iter().enumerate() {
        if u {
            remap[v] = kept.len();
            kept.push(vertices[v]);
        }
    }
    let triangles = triangles.into_iter().map(|t| t.map(|v| remap[v])).collect();
    let declared: Vec<[usize; 2]> = lines_declared
        .into_iter()
        .filter(|e| used[e[0]] && used[e[1]])
        .map(|e| e.map(|v| remap[v]))
        .collect();
    Mesh::new(kept, triangles)?.check_declared_boundary(&declared)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_single_cell() {
        let m = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 1, 1, DiagonalRule::Right).unwrap();
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_vertices(), 4);
        assert!((m.h_max() - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.h_min() - 1.0).abs() < 1e-15);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn eight_by_eight_edge_lengths() {
        let m = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 8, 8, DiagonalRule::Right).unwrap();
        assert!((m.h_max() - 2f64.sqrt() / 8.0).abs() < 1e-15);
        assert!((m.h_min() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn right_rule_gives_right_triangles() {
        let m = Mesh::rectangle([0.0, 2.0], [0.0, 1.0], 3, 2, DiagonalRule::Right).unwrap();
        for t in 0..m.n_triangles() {
            let [a, b, c] = m.triangle_points(t);
            let dot = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[0] - p[0]) + (q[1] - p[1]) * (r[1] - p[1]);
            let right = [dot(a, b, c), dot(b, c, a), dot(c, a, b)].iter().any(|d| d.abs() < 1e-14);
            assert!(right, "triangle {t} is not right-angled");
        }
    }

    #[test]
    fn channel_counts() {
        let m = Mesh::rectangle([-50.0, 50.0], [-5.0, 5.0], 200, 20, DiagonalRule::Right).unwrap();
        assert_eq!(m.n_triangles(), 8000);
        assert_eq!(m.boundary_edges().len(), 2 * (200 + 20));
        assert_eq!(m.boundary_loops().len(), 1);
    }

    #[test]
    fn degenerate_interval_rejected() {
        let err = Mesh::rectangle([1.0, 1.0], [0.0, 1.0], 2, 2, DiagonalRule::Right).unwrap_err();
        assert!(matches!(err, Error::InvalidGeometry(_)));
    }

    #[test]
    fn all_rules_valid_and_area_matches() {
        for rule in [DiagonalRule::Right, DiagonalRule::Left, DiagonalRule::UnionJack, DiagonalRule::Crossed] {
            let m = Mesh::rectangle([0.0, 3.0], [-1.0, 1.0], 5, 4, rule).unwrap();
            for t in 0..m.n_triangles() {
                assert!(m.triangle_area(t) > 0.0);
            }
            assert!((m.area() - 6.0).abs() < 1e-12 * 6.0);
            assert!((m.boundary_polygon_area() - 6.0).abs() < 1e-12 * 6.0);
        }
    }

    #[test]
    fn crossed_adds_cell_centres() {
        let m = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 3, 2, DiagonalRule::Crossed).unwrap();
        assert_eq!(m.n_triangles(), 24);
        assert_eq!(m.vertices().len(), 12 + 6);
        assert_eq!(m.boundary_edges().len(), 10);
    }

    #[test]
    fn clockwise_triangles_are_flipped() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 2, 1]],
        )
        .unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn simple_tri_round_trip_matches_generator() {
        let text = "# unit square\n4 2 4\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n0 1\n1 3\n3 2\n2 0\n";
        let read = Mesh::from_str_format(text, MeshFormat::SimpleTri).unwrap();
        let gen = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 1, 1, DiagonalRule::Right).unwrap();
        assert_eq!(read.vertices(), gen.vertices());
        assert_eq!(read.triangles(), gen.triangles());
        assert_eq!(read.boundary_edges(), gen.boundary_edges());
    }

    #[test]
    fn missing_vertex_is_validation_error() {
        let text = "3 1 0\n0 0\n1 0\n0 1\n0 1 7\n";
        let err = Mesh::from_str_format(text, MeshFormat::SimpleTri).unwrap_err();
        assert!(matches!(err, Error::MeshValidation(_)), "{err}");
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "3 1 0\n0 0\n1 zero\n0 1\n0 1 2\n";
        match Mesh::from_str_format(text, MeshFormat::SimpleTri).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]];
        let tris = vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
        let err = Mesh::new(verts, tris).unwrap_err();
        assert!(err.to_string().contains("shared by 3"), "{err}");
    }

    #[test]
    fn msh2_round_trip() {
        let m = Mesh::rectangle([0.0, 2.0], [0.0, 1.0], 4, 3, DiagonalRule::UnionJack).unwrap();
        let back = Mesh::from_str_format(&m.to_msh2(), MeshFormat::Msh2Ascii).unwrap();
        assert_eq!(back.triangles(), m.triangles());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn msh2_skips_unknown_sections_and_points() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n1\n2 1 \"water\"\n$EndPhysicalNames\n\
$Nodes\n5\n10 0 0 0\n11 1 0 0\n12 1 1 0\n13 0 1 0\n99 5 5 0\n$EndNodes\n\
$Elements\n4\n1 15 2 0 1 99\n2 1 2 0 1 10 11\n3 2 2 0 1 10 11 12\n4 2 2 0 1 10 12 13\n$EndElements\n";
        let m = Mesh::from_str_format(text, MeshFormat::Msh2Ascii).unwrap();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.n_triangles(), 2);
    }

    #[test]
    fn locate_centroid_and_outside() {
        let m = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 2, 2, DiagonalRule::Right).unwrap();
        let [a, b, c] = m.triangle_points(0);
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        let (t, bary) = m.locate_point(centroid).unwrap();
        assert_eq!(t, 0);
        for l in bary {
            assert!((l - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!(m.locate_point([2.0, 0.5]).is_none());
    }

    #[test]
    fn shared_vertex_goes_to_lowest_index() {
        let m = Mesh::rectangle([0.0, 1.0], [0.0, 1.0], 1, 1, DiagonalRule::Right).unwrap();
        // Vertex (1,1) belongs to both triangles.
        let (t, bary) = m.locate_point([1.0, 1.0]).unwrap();
        let incident: Vec<usize> = (0..m.n_triangles())
            .filter(|&t| m.triangles()[t].contains(&3))
            .collect();
        assert_eq!(t, *incident.iter().min().unwrap());
        assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
