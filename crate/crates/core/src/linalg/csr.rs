use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given sparsity pattern (row-wise column lists,
    /// need not be sorted or unique).
    pub fn from_pattern(nrows: usize, ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            debug_assert!(r.last().is_none_or(|&c| c < ncols));
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for &(i, j, _) in triplets {
            rows[i].push(j);
        }
        let mut m = CsrMatrix::from_pattern(nrows, ncols, rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        CsrMatrix::from_triplets(n, n, &triplets)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    /// Add `v` to entry (i, j), which must be in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `alpha * self + beta * other`; both matrices must share a pattern.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert!(
            self.row_ptr == other.row_ptr && self.col_idx == other.col_idx,
            "linear_combination requires identical sparsity patterns"
        );
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        CsrMatrix {
            values,
            ..self.clone()
        }
    }

    pub fn scaled(&self, alpha: f64) -> CsrMatrix {
        CsrMatrix {
            values: self.values.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] += v;
            }
        }
        d
    }

    /// Bitwise symmetry: `a_ij == a_ji` for every stored entry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
            })
    }

    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v);
            }
        }
        out
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_matrix_market()).map_err(|e| Error::io(path, e))
    }

    /// Parse MatrixMarket coordinate format (`general` or `symmetric`, real).
    pub fn from_matrix_market(text: &str) -> Result<CsrMatrix> {
        let perr = |line: usize, msg: &str| Error::Parse {
            path: "<matrix market>".into(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, banner) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
        let banner = banner.to_ascii_lowercase();
        if !banner.starts_with("%%matrixmarket matrix coordinate") {
            return Err(perr(1, "expected coordinate MatrixMarket banner"));
        }
        let symmetric = banner.contains("symmetric");
        let mut header = None;
        let mut triplets = Vec::new();
        for (ln, l) in lines {
            let l = l.trim();
            if l.is_empty() || l.starts_with('%') {
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            if header.is_none() {
                let dims: std::result::Result<Vec<usize>, _> = f.iter().map(|s| s.parse()).collect();
                let dims = dims.map_err(|_| perr(ln + 1, "bad size line"))?;
                if dims.len() != 3 {
                    return Err(perr(ln + 1, "size line needs rows cols nnz"));
                }
                header = Some((dims[0], dims[1]));
                continue;
            }
            if f.len() != 3 {
                return Err(perr(ln + 1, "entry needs i j value"));
            }
            let i: usize = f[0].parse().map_err(|_| perr(ln + 1, "bad row index"))?;
            let j: usize = f[1].parse().map_err(|_| perr(ln + 1, "bad column index"))?;
            let v: f64 = f[2].parse().map_err(|_| perr(ln + 1, "bad value"))?;
            if i == 0 || j == 0 {
                return Err(perr(ln + 1, "indices are 1-based"));
            }
            triplets.push((i - 1, j - 1, v));
            if symmetric && i != j {
                triplets.push((j - 1, i - 1, v));
            }
        }
        let (nrows, ncols) = header.ok_or_else(|| perr(1, "missing size line"))?;
        if triplets.iter().any(|&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(perr(1, "entry index out of range"));
        }
        Ok(CsrMatrix::from_triplets(nrows, ncols, &triplets))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = CsrMatrix::from_dense(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 2.0]]);
        let back = CsrMatrix::from_matrix_market(&m.to_matrix_market()).unwrap();
        assert_eq!(back, m);
        assert!(back.is_symmetric());
    }

    #[test]
    fn matrix_market_symmetric_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 1\n";
        let m = CsrMatrix::from_matrix_market(text).unwrap();
        assert_eq!(m.to_dense(), vec![vec![4.0, 1.0], vec![1.0, 0.0]]);
    }
}
