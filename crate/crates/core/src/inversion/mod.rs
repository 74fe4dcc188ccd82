//! Tikhonov regularisation in the empirical norm.
//!
//! The discrete problem is
//!
//! ```text
//! min_{F}  ‖T F − m‖²_n + λ ‖F‖²_{L²}
//! ```
//!
//! with `T` the [`ObservationOperator`]. Its minimiser solves the symmetric
//! positive-definite normal equations
//!
//! ```text
//! (λ M + n⁻¹ TᵀT) F = n⁻¹ Tᵀ m.
//! ```
//!
//! Two solvers are provided: [`MatrixFreeTikhonov`] runs CG where each
//! operator application is one forward and one adjoint time integration,
//! and [`ProbedTikhonov`] assembles `n⁻¹ TᵀT` densely by probing and then
//! factorises, which pays off when many right-hand sides or many `λ` share
//! one geometry.

mod lambda;
mod matrix_free;
mod probed;

pub use lambda::{
    initial_lambda, lambda_rule, rule_exponent, select_lambda, LambdaIterate, LambdaTrace,
    SelectOptions, StopReason,
};
pub use matrix_free::{tikhonov_solve, MatrixFreeTikhonov, NormalEquations, TikhonovProblem};
pub use probed::{FactoredTikhonov, ProbedTikhonov};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemSpace, FieldVector};
use crate::forward::ObservationOperator;
use crate::sensing::{empirical_distance, empirical_norm};

/// Minimiser of the Tikhonov functional for one `λ`.
#[derive(Clone, Debug)]
pub struct TikhonovResult {
    pub lambda: f64,
    pub f_h: FieldVector,
    /// `S_{τ,h} f_h` at the sensors.
    pub predicted: Vec<f64>,
    /// `‖S_{τ,h} f_h − m‖_n`
    pub residual_n: f64,
    /// `‖f_h‖_{L²}`
    pub penalty: f64,
    /// `residual_n² + λ penalty²`
    pub objective: f64,
    /// Outer CG iterations (zero for direct solves).
    pub cg_iterations: usize,
}

impl TikhonovResult {
    pub(crate) fn assemble(
        lambda: f64,
        f_h: FieldVector,
        predicted: Vec<f64>,
        data: &[f64],
        cg_iterations: usize,
    ) -> Result<Self> {
        let residual_n = empirical_distance(&predicted, data)?;
        let penalty = f_h.l2_norm();
        Ok(Self {
            lambda,
            f_h,
            predicted,
            residual_n,
            penalty,
            objective: residual_n * residual_n + lambda * penalty * penalty,
            cg_iterations,
        })
    }
}

/// Anything that returns the Tikhonov minimiser for given data and `λ`.
pub trait TikhonovSolver: Sync {
    fn observation(&self) -> &ObservationOperator;

    fn solve(&self, data: &[f64], lambda: f64) -> Result<TikhonovResult>;

    fn space(&self) -> &Arc<FemSpace> {
        self.observation().forward().space()
    }

    fn n_sensors(&self) -> usize {
        self.observation().n_sensors()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("regularisation parameter must be positive, got {lambda}")))
    }
}

pub(crate) fn check_data(obs: &ObservationOperator, data: &[f64]) -> Result<()> {
    if data.len() != obs.n_sensors() {
        return Err(Error::arg(format!(
            "{} data values for {} sensors",
            data.len(),
            obs.n_sensors()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("data contain non-finite values"));
    }
    Ok(())
}

/// Errors of a reconstruction against the true source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `‖S f* − S_{τ,h} f_h‖_n`
    pub pred_err_n: f64,
    /// `‖f* − f_h‖_{L²}`
    pub l2_err: f64,
    /// `‖f* − f_h‖_{H⁻¹}`
    pub hminus1_err: f64,
    /// `‖S_{τ,h} f_h − m‖_n`
    pub residual_n: f64,
}

/// Compares `result` with `f_true` (already on the inversion mesh, e.g. by
/// [`FieldVector::project_l2`]) and with the noiseless samples `S f*`.
pub fn error_metrics(
    result: &TikhonovResult,
    f_true: &FieldVector,
    truth_samples: &[f64],
) -> Result<ErrorMetrics> {
    if !result.f_h.same_space(f_true) {
        return Err(Error::arg("true source is not on the inversion mesh"));
    }
    let diff = f_true.sub(&result.f_h)?;
    Ok(ErrorMetrics {
        pred_err_n: empirical_distance(truth_samples, &result.predicted)?,
        l2_err: diff.l2_norm(),
        hminus1_err: diff.hminus1_norm()?,
        residual_n: result.residual_n,
    })
}

/// `‖m‖²_n`, the objective at `f = 0`.
pub fn zero_objective(data: &[f64]) -> Result<f64> {
    empirical_norm(data).map(|v| v * v)
}
