use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of the pencil `A v = ρ B v`, eigenvalues ascending and
/// eigenvectors `B`-orthonormal in the matching columns.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Dense symmetric-definite generalized eigensolver.
///
/// Reduces to a standard problem through `B = L Lᵀ` and
/// `C = L⁻¹ A L⁻ᵀ`, then diagonalises `C` with a symmetric tridiagonal QR
/// sweep. Intended for desk-scale matrices (a few thousand rows at most).
pub fn dense_generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::arg("generalized eigenproblem needs two square matrices of equal size"));
    }
    let chol = Cholesky::new(b.clone())
        .ok_or_else(|| Error::arg("B is not symmetric positive definite (Cholesky failed)"))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ via two triangular solves
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    let c_t = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    let c = (&c_t + c_t.transpose()) * 0.5;

    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut w = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &eig.eigenvectors.column(src));
    }
    let vectors = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| Error::arg("singular Cholesky factor"))?;
    Ok(GeneralizedEigen { values, vectors })
}

/// Cholesky factorisation of a dense SPD matrix, for repeated solves.
#[derive(Clone, Debug)]
pub struct DenseCholesky {
    inner: Cholesky<f64, nalgebra::Dyn>,
}

impl DenseCholesky {
    pub fn factor(a: DMatrix<f64>) -> Result<Self> {
        Cholesky::new(a)
            .map(|inner| Self { inner })
            .ok_or_else(|| Error::arg("matrix is not symmetric positive definite"))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = nalgebra::DVector::from_column_slice(b);
        self.inner.solve(&rhs).as_slice().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn standard_diagonal() {
        let e = dense_generalized_eig(&diag(&[1.0, 2.0, 3.0]), &DMatrix::identity(3, 3)).unwrap();
        close(&e.values, &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn inverse_weights() {
        let e = dense_generalized_eig(&DMatrix::identity(3, 3), &diag(&[1.0, 2.0, 4.0])).unwrap();
        close(&e.values, &[0.25, 0.5, 1.0]);
    }

    #[test]
    fn two_by_two() {
        let e = dense_generalized_eig(&diag(&[2.0, 2.0]), &diag(&[1.0, 2.0])).unwrap();
        close(&e.values, &[1.0, 2.0]);
    }

    #[test]
    fn indefinite_b_is_an_argument_error() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            dense_generalized_eig(&DMatrix::identity(2, 2), &b),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn residual_of_random_pencil() {
        let n = 12;
        let r = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4);
        let a = &r + r.transpose();
        let b = r.transpose() * &r + DMatrix::identity(n, n);
        let e = dense_generalized_eig(&a, &b).unwrap();
        let (na, nb) = (a.norm(), b.norm());
        for k in 0..n {
            let v = e.vectors.column(k);
            let res = (&a * v - &b * v * e.values[k]).norm();
            assert!(res <= 1e-8 * (na + e.values[k].abs() * nb));
            if k > 0 {
                assert!(e.values[k] >= e.values[k - 1]);
            }
        }
    }
}
