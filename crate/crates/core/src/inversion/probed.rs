use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::fem::FieldVector;
use crate::forward::ObservationOperator;
use crate::inversion::{check_data, check_lambda, TikhonovResult, TikhonovSolver};
use crate::linalg::{CsrMatrix, DenseCholesky};

/// Dense route: probes `S_{τ,h}` once, forms `G = n⁻¹ Kᵀ EᵀE K` and then
/// answers every `(data, λ)` with a Cholesky solve of `λ M + G`.
///
/// Memory and set-up grow like `N_h²` and `N_h³`, so this is meant for
/// meshes up to a few thousand unknowns.
#[derive(Clone, Debug)]
pub struct ProbedTikhonov {
    observation: ObservationOperator,
    /// `K = S_{τ,h}` as a dense matrix.
    forward: DMatrix<f64>,
    normal: DMatrix<f64>,
    mass: DMatrix<f64>,
}

impl ProbedTikhonov {
    pub fn new(observation: ObservationOperator) -> Result<Self> {
        let forward = observation.forward().dense_matrix()?;
        let e = observation.evaluation();
        let n = observation.n_sensors() as f64;
        let dofs = observation.n_dof();

        let mut triplets = Vec::new();
        for s in 0..e.n_rows() {
            let row: Vec<(usize, f64)> = e.row(s).collect();
            for &(i, a) in &row {
                for &(j, b) in &row {
                    triplets.push((i, j, a * b / n));
                }
            }
        }
        let ete = CsrMatrix::from_triplets(dofs, dofs, &triplets)?;

        let mut w = DMatrix::zeros(dofs, dofs);
        for j in 0..dofs {
            let col = forward.column(j);
            ete.spmv_into(col.as_slice(), w.column_mut(j).as_mut_slice());
        }
        let mut normal = forward.transpose() * w;
        normal = (&normal + normal.transpose()) * 0.5;
        let mass = observation.forward().space().mass().to_dense();
        Ok(Self {
            observation,
            forward,
            normal,
            mass,
        })
    }

    /// `G = n⁻¹ TᵀT`
    pub fn normal_matrix(&self) -> &DMatrix<f64> {
        &self.normal
    }

    /// `S_{τ,h}` column by column.
    pub fn forward_matrix(&self) -> &DMatrix<f64> {
        &self.forward
    }

    /// Factorises `λ M + G` for repeated solves with the same `λ`.
    pub fn factor(&self, lambda: f64) -> Result<FactoredTikhonov<'_>> {
        check_lambda(lambda)?;
        let a = &self.mass * lambda + &self.normal;
        Ok(FactoredTikhonov {
            parent: self,
            lambda,
            chol: DenseCholesky::factor(a)?,
        })
    }

    fn rhs(&self, data: &[f64]) -> Result<Vec<f64>> {
        check_data(&self.observation, data)?;
        let n = data.len() as f64;
        let mut load = vec![0.0; self.observation.n_dof()];
        self.observation.evaluation().spmv_transpose_into(data, &mut load);
        let b = self.forward.tr_mul(&DVector::from_vec(load)) / n;
        Ok(b.data.into())
    }

    fn predict(&self, f: &[f64]) -> Result<Vec<f64>> {
        let u = &self.forward * DVector::from_column_slice(f);
        self.observation.evaluation().spmv(u.as_slice())
    }
}

impl TikhonovSolver for ProbedTikhonov {
    fn observation(&self) -> &ObservationOperator {
        &self.observation
    }

    fn solve(&self, data: &[f64], lambda: f64) -> Result<TikhonovResult> {
        self.factor(lambda)?.solve(data)
    }
}

/// `λ M + G` factorised for one `λ`.
pub struct FactoredTikhonov<'a> {
    parent: &'a ProbedTikhonov,
    lambda: f64,
    chol: DenseCholesky,
}

impl FactoredTikhonov<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn solve(&self, data: &[f64]) -> Result<TikhonovResult> {
        let b = self.parent.rhs(data)?;
        let f = self.chol.solve(&b);
        let predicted = self.parent.predict(&f)?;
        let f_h = FieldVector::from_coeffs(self.parent.observation.forward().space(), f)?;
        TikhonovResult::assemble(self.lambda, f_h, predicted, data, 0)
    }
}
