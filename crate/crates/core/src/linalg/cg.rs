//! Conjugate gradients for symmetric positive-definite operators.
//!
//! The solver only needs `y = A x`, so it runs equally on an assembled
//! [`CsrMatrix`](super::CsrMatrix) and on matrix-free operators such as the
//! Tikhonov normal equations, where every application is a forward and an
//! adjoint time integration.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, LinearOperator};

/// Stopping rule for [`cg_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgConfig {
    /// Stop once `||b - A x|| <= rel_tolerance * ||b||`.
    pub rel_tolerance: f64,
    /// Iteration cap; `None` means `10 * n`.
    pub max_iterations: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

impl CgConfig {
    pub fn with_tolerance(rel_tolerance: f64) -> Self {
        Self {
            rel_tolerance,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::arg("CG relative tolerance must be positive"));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::arg("CG needs at least one iteration"));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n.max(1))
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual `||b - A x|| / ||b||` of the returned iterate.
    pub relative_residual: f64,
}

/// Solves `A x = b` from a zero initial guess without preconditioning.
pub fn cg_solve<A>(a: &A, b: &[f64], cfg: &CgConfig) -> Result<CgOutcome>
where
    A: LinearOperator + ?Sized,
{
    cg_solve_with(a, b, None, None, cfg)
}

/// Preconditioned CG with optional warm start.
///
/// `inv_diag` is the inverse of a diagonal (Jacobi) preconditioner. When the
/// recurrence residual meets the tolerance the true residual is recomputed;
/// if round-off has let them drift apart the iteration restarts from the
/// current iterate.
pub fn cg_solve_with<A>(
    a: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    inv_diag: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgOutcome>
where
    A: LinearOperator + ?Sized,
{
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::arg(format!(
            "CG: right-hand side of length {} for an operator of dimension {n}",
            b.len()
        )));
    }
    if let Some(x0) = x0 {
        if x0.len() != n {
            return Err(Error::arg("CG: initial guess has the wrong length"));
        }
    }
    if let Some(d) = inv_diag {
        if d.len() != n {
            return Err(Error::arg("CG: preconditioner has the wrong length"));
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("CG: right-hand side is not finite"));
    }

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = cfg.rel_tolerance * b_norm;
    let cap = cfg.iteration_cap(n);

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    let precondition = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(d) => z.iter_mut().zip(r.iter().zip(d)).for_each(|(z, (r, d))| *z = r * d),
        None => z.copy_from_slice(r),
    };

    let true_residual = |x: &[f64], r: &mut [f64], scratch: &mut [f64]| -> Result<f64> {
        a.apply(x, scratch)?;
        r.iter_mut()
            .zip(b.iter().zip(scratch.iter()))
            .for_each(|(r, (b, ax))| *r = b - ax);
        Ok(norm(r))
    };

    let mut iterations = 0;
    let mut r_norm = true_residual(&x, &mut r, &mut ap)?;
    // outer loop restarts from the true residual
    loop {
        if r_norm <= target {
            return Ok(CgOutcome {
                x,
                iterations,
                relative_residual: r_norm / b_norm,
            });
        }
        if iterations >= cap {
            return Err(Error::Solver {
                solver: "conjugate gradient",
                iterations,
                residual: r_norm / b_norm,
            });
        }
        precondition(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let mut recurrence_norm = r_norm;
        while recurrence_norm > target && iterations < cap {
            a.apply(&p, &mut ap)?;
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Solver {
                    solver: "conjugate gradient (operator not positive definite)",
                    iterations,
                    residual: recurrence_norm / b_norm,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            recurrence_norm = norm(&r);
            precondition(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        r_norm = true_residual(&x, &mut r, &mut ap)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, FnOperator};

    #[test]
    fn identity_system() {
        let b: Vec<f64> = (1..=5).map(f64::from).collect();
        let out = cg_solve(&CsrMatrix::identity(5), &b, &CgConfig::default()).unwrap();
        for (x, e) in out.x.iter().zip(&b) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let out = cg_solve(&a, &[3.0, 3.0], &CgConfig::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12);
        assert!((out.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_hundred() {
        let triplets: Vec<_> = (0..100).map(|i| (i, i, (i + 1) as f64)).collect();
        let a = CsrMatrix::from_triplets(100, 100, &triplets).unwrap();
        let out = cg_solve(&a, &vec![1.0; 100], &CgConfig::default()).unwrap();
        for (i, x) in out.x.iter().enumerate() {
            assert!((x - 1.0 / (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let out = cg_solve(&CsrMatrix::identity(3), &[0.0; 3], &CgConfig::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0; 3]);
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let triplets: Vec<_> = (0..50).map(|i| (i, i, 1.0 + i as f64)).collect();
        let a = CsrMatrix::from_triplets(50, 50, &triplets).unwrap();
        let cfg = CgConfig {
            rel_tolerance: 1e-14,
            max_iterations: Some(3),
        };
        match cg_solve(&a, &vec![1.0; 50], &cfg) {
            Err(Error::Solver {
                iterations,
                residual,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-14);
            }
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn matrix_free_and_jacobi() {
        let diag: Vec<f64> = (0..20).map(|i| 1.0 + (i * i) as f64).collect();
        let op = FnOperator::new(20, |x: &[f64], y: &mut [f64]| {
            for i in 0..20 {
                y[i] = diag[i] * x[i];
            }
            Ok(())
        });
        let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
        let b = vec![1.0; 20];
        let out = cg_solve_with(&op, &b, None, Some(&inv), &CgConfig::default()).unwrap();
        // exact Jacobi preconditioning converges in one step
        assert_eq!(out.iterations, 1);
        assert!(out.relative_residual <= 1e-10);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = CgConfig {
            rel_tolerance: 0.0,
            max_iterations: None,
        };
        assert!(cg_solve(&CsrMatrix::identity(2), &[1.0, 1.0], &cfg).is_err());
    }
}
