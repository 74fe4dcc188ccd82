use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Cholesky factor `A = L Lᵀ` of a symmetric positive-definite banded matrix.
///
/// Row `i` of `L` is stored densely over columns `i - bandwidth ..= i`.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    factor: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the lower triangle of `a`; the upper triangle is not read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::arg("banded Cholesky needs a square matrix"));
        }
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        // slot of (i, j) for i - bw <= j <= i
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    l[at(i, j)] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let k0 = lo.max(j.saturating_sub(bw));
                let mut s = l[at(i, j)];
                for k in k0..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::arg(format!(
                            "matrix is not positive definite (pivot {s:.3e} at row {i})"
                        )));
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self {
            n,
            bandwidth: bw,
            factor: l,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Overwrites `x` (holding `b` on entry) with `A⁻¹ b`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let bw = self.bandwidth;
        let w = bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let row = &self.factor[i * w..(i + 1) * w];
            let mut s = x[i];
            for k in lo..i {
                s -= row[k + bw - i] * x[k];
            }
            x[i] = s / row[bw];
        }
        for i in (0..self.n).rev() {
            let hi = (i + bw).min(self.n - 1);
            let mut s = x[i];
            for k in i + 1..=hi {
                s -= self.factor[k * w + (i + bw - k)] * x[k];
            }
            x[i] = s / self.factor[i * w + bw];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::arg("banded solve: right-hand side has the wrong length"));
        }
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn solves_tridiagonal() {
        let a = tridiag(30);
        let x_true: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let b = a.spmv(&x_true).unwrap();
        let chol = BandedCholesky::factor(&a).unwrap();
        assert_eq!(chol.bandwidth(), 1);
        let x = chol.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(BandedCholesky::factor(&a).is_err());
    }
}
