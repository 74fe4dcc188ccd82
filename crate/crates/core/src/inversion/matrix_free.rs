use crate::error::Result;
use crate::fem::FieldVector;
use crate::forward::ObservationOperator;
use crate::inversion::{check_data, check_lambda, TikhonovResult, TikhonovSolver};
use crate::linalg::{axpy, cg_solve_with, CgConfig, LinearOperator};

/// `x ↦ λ M x + n⁻¹ Tᵀ T x`, applied without assembling `TᵀT`.
pub struct NormalEquations<'a> {
    observation: &'a ObservationOperator,
    lambda: f64,
}

impl<'a> NormalEquations<'a> {
    pub fn new(observation: &'a ObservationOperator, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { observation, lambda })
    }

    /// `n⁻¹ Tᵀ m`
    pub fn rhs(&self, data: &[f64]) -> Result<Vec<f64>> {
        check_data(self.observation, data)?;
        let n = data.len() as f64;
        let mut b = self.observation.apply_transpose(data)?;
        b.iter_mut().for_each(|v| *v /= n);
        Ok(b)
    }
}

impl LinearOperator for NormalEquations<'_> {
    fn dim(&self) -> usize {
        self.observation.n_dof()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.observation.n_sensors() as f64;
        let tx = self.observation.apply(x)?;
        let ttx = self.observation.apply_transpose(&tx)?;
        let mass = self.observation.forward().space().mass();
        mass.spmv_into(x, y);
        y.iter_mut().for_each(|v| *v *= self.lambda);
        axpy(1.0 / n, &ttx, y);
        Ok(())
    }
}

/// Inputs of one regularised solve.
#[derive(Clone, Copy)]
pub struct TikhonovProblem<'a> {
    pub observation: &'a ObservationOperator,
    pub data: &'a [f64],
    pub lambda: f64,
    pub cg: CgConfig,
    /// Diagonal of `n⁻¹ TᵀT`, if known, to sharpen the Jacobi preconditioner.
    pub normal_diagonal: Option<&'a [f64]>,
}

impl<'a> TikhonovProblem<'a> {
    pub fn new(observation: &'a ObservationOperator, data: &'a [f64], lambda: f64) -> Self {
        Self {
            observation,
            data,
            lambda,
            cg: CgConfig::default(),
            normal_diagonal: None,
        }
    }
}

/// `tikhonov_solve`: CG on the normal equations, Jacobi preconditioned by
/// `diag(λ M)` plus the optional normal-matrix diagonal.
pub fn tikhonov_solve(p: &TikhonovProblem<'_>) -> Result<TikhonovResult> {
    let op = NormalEquations::new(p.observation, p.lambda)?;
    let b = op.rhs(p.data)?;
    let mass_diag = p.observation.forward().space().mass().diagonal();
    let inv_diag: Vec<f64> = match p.normal_diagonal {
        Some(d) if d.len() == mass_diag.len() => {
            mass_diag.iter().zip(d).map(|(m, d)| 1.0 / (p.lambda * m + d)).collect()
        }
        Some(_) => return Err(crate::Error::arg("normal diagonal has the wrong length")),
        None => mass_diag.iter().map(|m| 1.0 / (p.lambda * m)).collect(),
    };
    let out = cg_solve_with(&op, &b, None, Some(&inv_diag), &p.cg)?;
    let f_h = FieldVector::from_coeffs(p.observation.forward().space(), out.x)?;
    let predicted = p.observation.apply(f_h.coeffs())?;
    TikhonovResult::assemble(p.lambda, f_h, predicted, p.data, out.iterations)
}

/// [`tikhonov_solve`] behind the [`TikhonovSolver`] interface.
#[derive(Clone, Debug)]
pub struct MatrixFreeTikhonov {
    observation: ObservationOperator,
    cg: CgConfig,
}

impl MatrixFreeTikhonov {
    pub fn new(observation: ObservationOperator, cg: CgConfig) -> Self {
        Self { observation, cg }
    }
}

impl TikhonovSolver for MatrixFreeTikhonov {
    fn observation(&self) -> &ObservationOperator {
        &self.observation
    }

    fn solve(&self, data: &[f64], lambda: f64) -> Result<TikhonovResult> {
        tikhonov_solve(&TikhonovProblem {
            cg: self.cg,
            ..TikhonovProblem::new(&self.observation, data, lambda)
        })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{FemSpace, ProblemCoefficients};
    use crate::forward::{ForwardConfig, ForwardOperator};
    use crate::linalg::dot;
    use crate::sensing::SensorSet;
    use crate::Error;

    fn setup(h: f64, k: usize) -> ObservationOperator {
        let space = FemSpace::with_spacing(h).unwrap();
        let cfg = ForwardConfig::new(space, ProblemCoefficients::default(), 8).unwrap();
        let fwd = Arc::new(ForwardOperator::new(cfg).unwrap());
        ObservationOperator::new(fwd, &SensorSet::uniform(k).unwrap()).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_source() {
        let obs = setup(0.25, 4);
        let r = tikhonov_solve(&TikhonovProblem::new(&obs, &[0.0; 16], 1e-3)).unwrap();
        assert!(r.f_h.coeffs().iter().all(|v| *v == 0.0));
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn nonpositive_lambda_rejected() {
        let obs = setup(0.25, 4);
        for lambda in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                tikhonov_solve(&TikhonovProblem::new(&obs, &[1.0; 16], lambda)),
                Err(Error::Argument(_))
            ));
        }
    }

    #[test]
    fn wrong_data_length_rejected() {
        let obs = setup(0.25, 4);
        assert!(tikhonov_solve(&TikhonovProblem::new(&obs, &[1.0; 15], 1.0)).is_err());
    }

    #[test]
    fn operator_is_symmetric() {
        let obs = setup(0.125, 5);
        let op = NormalEquations::new(&obs, 1e-2).unwrap();
        let n = op.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 3 % 5) as f64 - 2.0).cos()).collect();
        let (mut ax, mut ay) = (vec![0.0; n], vec![0.0; n]);
        op.apply(&x, &mut ax).unwrap();
        op.apply(&y, &mut ay).unwrap();
        let (l, r) = (dot(&ax, &y), dot(&x, &ay));
        assert!((l - r).abs() <= 1e-12 * l.abs().max(r.abs()));
    }

    #[test]
    fn solution_satisfies_normal_equations() {
        let obs = setup(0.125, 6);
        let data: Vec<f64> = (0..36).map(|i| 0.01 * ((i as f64) * 0.7).sin()).collect();
        let lambda = 1e-4;
        let r = tikhonov_solve(&TikhonovProblem::new(&obs, &data, lambda)).unwrap();
        let op = NormalEquations::new(&obs, lambda).unwrap();
        let b = op.rhs(&data).unwrap();
        let mut af = vec![0.0; op.dim()];
        op.apply(r.f_h.coeffs(), &mut af).unwrap();
        let res: f64 = af.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bn = dot(&b, &b).sqrt();
        assert!(res <= 1e-8 * bn, "{res} vs {bn}");
    }
}
