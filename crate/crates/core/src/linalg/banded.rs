use super::ordering::{invert, reverse_cuthill_mckee};
use super::CsrMatrix;
use crate::error::{Error, Result};

/// Band LU factorization with partial pivoting for general (nonsymmetric)
/// sparse matrices, after a reverse Cuthill–McKee reordering of the
/// symmetrized pattern.
#[derive(Debug, Clone)]
pub struct BandedLu {
    perm: Vec<usize>,
    n: usize,
    kl: usize,
    /// Stored columns per row of U: `j ∈ [i, i + ku + kl]`.
    width: usize,
    upper: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU requires a square matrix");
        let perm = reverse_cuthill_mckee(a);
        let inv = invert(&perm);
        let (mut kl, mut ku) = (0, 0);
        for old_i in 0..n {
            let i = inv[old_i];
            for &old_j in a.row(old_i).0 {
                let j = inv[old_j];
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        // Rows are stored relative to column i - kl so that multipliers and
        // pivoting fill fit: columns [i - kl, i + ku + kl].
        let span = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * span];
        let idx = |i: usize, j: usize| i * span + (j + kl - i);
        for old_i in 0..n {
            let i = inv[old_i];
            let (cols, vals) = a.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                band[idx(i, inv[old_j])] += v;
            }
        }

        let mut multipliers = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = band[idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = band[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(k));
            }
            pivots[k] = p;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    band.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = band[idx(k, k)];
            for i in k + 1..=last_row {
                let m = band[idx(i, k)] / pivot;
                multipliers[k * kl.max(1) + (i - k - 1)] = m;
                band[idx(i, k)] = 0.0;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let u = band[idx(k, j)];
                        band[idx(i, j)] -= m * u;
                    }
                }
            }
        }

        let width = ku + kl + 1;
        let mut upper = vec![0.0; n * width];
        for i in 0..n {
            for j in i..(i + width).min(n) {
                upper[i * width + (j - i)] = band[idx(i, j)];
            }
        }
        Ok(BandedLu {
            perm,
            n,
            kl,
            width,
            upper,
            multipliers,
            pivots,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let stride = self.kl.max(1);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    y[i] -= self.multipliers[k * stride + (i - k - 1)] * yk;
                }
            }
        }
        for i in (0..n).rev() {
            let row = &self.upper[i * self.width..(i + 1) * self.width];
            let mut s = y[i];
            for j in i + 1..(i + self.width).min(n) {
                s -= row[j - i] * y[j];
            }
            y[i] = s / row[0];
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
    fn needs_pivoting() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 1.0]]);
        let lu = BandedLu::factor(&a).unwrap();
        let xs = [1.0, -2.0, 0.5];
        let b = a.matvec(&xs);
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-14, "{x:?}");
        }
    }

    #[test]
    fn nonsymmetric_block_system() {
        let n = 40;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, if i % 2 == 0 { 0.1 } else { 3.0 }));
            if i + 1 < n {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, 0.7));
            }
            if i + 3 < n {
                trip.push((i + 3, i, 0.2));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = BandedLu::factor(&a).unwrap().solve(&a.matvec(&xs));
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn singular_detected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(BandedLu::factor(&a), Err(Error::Singular(_))));
    }
}
