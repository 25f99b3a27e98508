use super::ordering::{invert, reverse_cuthill_mckee};
use super::CsrMatrix;
use crate::error::{Error, Result};

/// Envelope (profile) Cholesky factorization `P A Pᵀ = L Lᵀ` under a
/// reverse Cuthill–McKee ordering.
///
/// Row `i` of `L` is stored densely from its first nonzero column up to the
/// diagonal; fill stays inside the envelope of the permuted matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "cholesky requires a square matrix");
        let perm = reverse_cuthill_mckee(a);
        let inv = invert(&perm);

        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            let i = inv[old_i];
            for &old_j in a.row(old_i).0 {
                let j = inv[old_j];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for old_i in 0..n {
            let i = inv[old_i];
            let (cols, vals) = a.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let j = inv[old_j];
                if j <= i {
                    data[offset[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            for j in fi..i {
                let fj = first[j];
                let row_j = offset[j];
                let k0 = fi.max(fj);
                let mut s = data[row_i + j - fi];
                for k in k0..j {
                    s -= data[row_i + k - fi] * data[row_j + k - fj];
                }
                data[row_i + j - fi] = s / data[row_j + j - fj];
            }
            let mut d = data[row_i + i - fi];
            for k in fi..i {
                let l = data[row_i + k - fi];
                d -= l * l;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            data[row_i + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut s = y[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * y[k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let x = f.solve(&[1.0, 2.0]);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            EnvelopeCholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn laplacian_with_shift() {
        let n = 30;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 2.5));
            if i + 1 < n {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        trip.push((0, n - 1, -0.25));
        trip.push((n - 1, 0, -0.25));
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&xs);
        let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
