use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::FieldVector;
use crate::forward::ForwardOperator;
use crate::linalg::CsrMatrix;
use crate::sensing::SensorSet;

/// `T = E S_{τ,h}`: the forward solve followed by point evaluation at the
/// sensors, together with its transpose.
#[derive(Debug, Clone)]
pub struct ObservationOperator {
    forward: Arc<ForwardOperator>,
    evaluation: CsrMatrix,
}

impl ObservationOperator {
    pub fn new(forward: Arc<ForwardOperator>, sensors: &SensorSet) -> Result<Self> {
        let evaluation = forward.space().evaluation_matrix(sensors.points())?;
        Ok(Self {
            forward,
            evaluation,
        })
    }

    pub fn forward(&self) -> &Arc<ForwardOperator> {
        &self.forward
    }

    /// Sparse point-evaluation matrix `E` (sensors × dofs).
    pub fn evaluation(&self) -> &CsrMatrix {
        &self.evaluation
    }

    pub fn n_sensors(&self) -> usize {
        self.evaluation.n_rows()
    }

    pub fn n_dof(&self) -> usize {
        self.forward.n_dof()
    }

    /// `T F`
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let u = self.forward.apply(f)?;
        self.evaluation.spmv(&u)
    }

    /// `Tᵀ w`: point loads `Σ wᵢ δ_{xᵢ}` distributed onto the hat functions,
    /// then the reverse-time recursion.
    pub fn apply_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.n_sensors() {
            return Err(Error::arg(format!(
                "{} weights for {} sensors",
                w.len(),
                self.n_sensors()
            )));
        }
        let mut load = vec![0.0; self.n_dof()];
        self.evaluation.spmv_transpose_into(w, &mut load);
        self.forward.apply_transpose(&load)
    }

    /// `sample_forward`: values of `S_{τ,h} f` at the sensors.
    pub fn sample(&self, f: &FieldVector) -> Result<Vec<f64>> {
        if f.space().mesh() != self.forward.space().mesh() {
            return Err(Error::arg("source field lives on a different mesh"));
        }
        self.apply(f.coeffs())
    }

    /// `adjoint_sample`: `Tᵀ w` as a field.
    pub fn adjoint_sample(&self, w: &[f64]) -> Result<FieldVector> {
        FieldVector::from_coeffs(self.forward.space(), self.apply_transpose(w)?)
    }
}
