//! The discrete forward map `f ↦ u_h^N` and its transpose.
//!
//! With `B = M + τA`, backward Euler reads
//!
//! ```text
//! B Uⁱ = M Uⁱ⁻¹ + τ g(tⁱ) M F,   U⁰ = 0,   i = 1..N
//! ```
//!
//! and `S_{τ,h} F := Uᴺ`. Composed with point evaluation `E` at the sensors
//! this gives the observation map `T = E S_{τ,h}`, whose algebraic transpose
//! runs the same recursion backwards in time.

mod observation;
mod spectral;

pub use observation::ObservationOperator;
pub use spectral::{modal_alpha, spectral_oracle, SpectralMode, SpectralSource};

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble_stiffness, FemSpace, FieldVector, ProblemCoefficients};
use crate::linalg::{
    axpy, cg_solve_with, dense_generalized_eig, BandedCholesky, CgConfig, CsrMatrix,
};

/// How each implicit step `B x = r` is solved.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum StepSolver {
    /// Banded Cholesky factorisation of `B`, computed once.
    #[default]
    Direct,
    /// Jacobi-preconditioned CG warm-started from the previous step.
    Cg { rel_tolerance: f64 },
}

/// Space, coefficients and time grid of the discrete heat problem.
#[derive(Clone, Debug)]
pub struct ForwardConfig {
    pub space: Arc<FemSpace>,
    pub coeff: ProblemCoefficients,
    pub tau: f64,
    pub n_steps: usize,
    pub step_solver: StepSolver,
}

impl ForwardConfig {
    /// Uniform grid with `n_steps` steps of size `T / n_steps`.
    pub fn new(space: Arc<FemSpace>, coeff: ProblemCoefficients, n_steps: usize) -> Result<Self> {
        coeff.validate()?;
        if n_steps == 0 {
            return Err(Error::arg("need at least one time step"));
        }
        let tau = coeff.final_time / n_steps as f64;
        Ok(Self {
            space,
            coeff,
            tau,
            n_steps,
            step_solver: StepSolver::default(),
        })
    }

    /// Uniform grid with step `tau`; `T / tau` must be an integer.
    pub fn with_time_step(space: Arc<FemSpace>, coeff: ProblemCoefficients, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::arg("time step must be positive"));
        }
        let ratio = coeff.final_time / tau;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio {
            return Err(Error::arg(format!(
                "T/tau = {ratio} is not a positive integer"
            )));
        }
        Self::new(space, coeff, n as usize)
    }

    pub fn with_step_solver(mut self, step_solver: StepSolver) -> Self {
        self.step_solver = step_solver;
        self
    }

    /// Time level `tⁱ = i τ`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.tau
    }
}

enum StepBackend {
    Direct(BandedCholesky),
    Cg { inv_diag: Vec<f64>, cfg: CgConfig },
}

/// Assembled backward-Euler propagator for one [`ForwardConfig`].
pub struct ForwardOperator {
    cfg: ForwardConfig,
    stiffness: CsrMatrix,
    system: CsrMatrix,
    backend: StepBackend,
    /// `τ g(tⁱ)` for `i = 1..=N`
    weights: Vec<f64>,
}

impl std::fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("n_dof", &self.n_dof())
            .field("tau", &self.cfg.tau)
            .field("n_steps", &self.cfg.n_steps)
            .finish()
    }
}

impl ForwardOperator {
    pub fn new(cfg: ForwardConfig) -> Result<Self> {
        cfg.coeff.validate()?;
        let stiffness = assemble_stiffness(cfg.space.mesh(), &cfg.coeff)?;
        let system = cfg.space.mass().linear_combination(1.0, &stiffness, cfg.tau)?;
        let weights = (1..=cfg.n_steps)
            .map(|i| {
                let g = cfg.coeff.g.eval(cfg.time(i));
                if g >= 0.0 {
                    Ok(cfg.tau * g)
                } else {
                    Err(Error::arg(format!("g({}) = {g} is negative", cfg.time(i))))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let backend = match cfg.step_solver {
            StepSolver::Direct => StepBackend::Direct(BandedCholesky::factor(&system)?),
            StepSolver::Cg { rel_tolerance } => StepBackend::Cg {
                inv_diag: system.diagonal().iter().map(|d| 1.0 / d).collect(),
                cfg: CgConfig::with_tolerance(rel_tolerance),
            },
        };
        Ok(Self {
            cfg,
            stiffness,
            system,
            backend,
            weights,
        })
    }

    pub fn config(&self) -> &ForwardConfig {
        &self.cfg
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.cfg.space
    }

    pub fn n_dof(&self) -> usize {
        self.cfg.space.n_dof()
    }

    /// Solves `B x = rhs`, using `x` as the warm start for CG.
    fn step(&self, rhs: &[f64], x: &mut Vec<f64>) -> Result<()> {
        match &self.backend {
            StepBackend::Direct(chol) => {
                x.copy_from_slice(rhs);
                chol.solve_in_place(x);
            }
            StepBackend::Cg { inv_diag, cfg } => {
                let out = cg_solve_with(&self.system, rhs, Some(x), Some(inv_diag), cfg)?;
                *x = out.x;
            }
        }
        Ok(())
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.n_dof() {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "vector of length {} for {} dofs",
                v.len(),
                self.n_dof()
            )))
        }
    }

    /// `S_{τ,h}` on coefficient vectors.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let mut out = None;
        self.integrate(f, |i, u| {
            if i == self.cfg.n_steps {
                out = Some(u.to_vec());
            }
        })?;
        Ok(out.unwrap_or_else(|| vec![0.0; self.n_dof()]))
    }

    /// Runs the time loop, handing each state `Uⁱ` (i ≥ 1) to `visit`.
    pub fn integrate(&self, f: &[f64], mut visit: impl FnMut(usize, &[f64])) -> Result<()> {
        self.check_len(f)?;
        let mass = self.cfg.space.mass();
        let mf = mass.spmv(f)?;
        let n = self.n_dof();
        let mut u = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..=self.cfg.n_steps {
            mass.spmv_into(&u, &mut rhs);
            axpy(self.weights[i - 1], &mf, &mut rhs);
            self.step(&rhs, &mut u)?;
            visit(i, &u);
        }
        Ok(())
    }

    /// Exact transpose of [`apply`](Self::apply) in the Euclidean
    /// coefficient inner product.
    pub fn apply_transpose(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z)?;
        let mass = self.cfg.space.mass();
        let n = self.n_dof();
        let mut acc = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut rhs = z.to_vec();
        for i in (1..=self.cfg.n_steps).rev() {
            self.step(&rhs, &mut q)?;
            axpy(self.weights[i - 1], &q, &mut acc);
            if i > 1 {
                mass.spmv_into(&q, &mut rhs);
            }
        }
        mass.spmv(&acc)
    }

    /// `forward_solve`: the terminal state `u_h^N` for source `f`.
    pub fn solve(&self, f: &FieldVector) -> Result<FieldVector> {
        if !Arc::ptr_eq(f.space(), &self.cfg.space) && f.space().mesh() != self.cfg.space.mesh() {
            return Err(Error::arg("source field lives on a different mesh"));
        }
        FieldVector::from_coeffs(&self.cfg.space, self.apply(f.coeffs())?)
    }

    /// Dense matrix of `S_{τ,h}` obtained by applying it to every unit
    /// vector. Columns are computed in parallel.
    pub fn probe_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.n_dof();
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply(&e)
            })
            .collect::<Result<_>>()?;
        let mut k = DMatrix::zeros(n, n);
        for (j, col) in columns.iter().enumerate() {
            k.column_mut(j).copy_from_slice(col);
        }
        Ok(k)
    }

    /// Dense `S_{τ,h}` by whichever of [`probe_dense`](Self::probe_dense)
    /// and [`modal_matrix`](Self::modal_matrix) is cheaper: stepping costs
    /// about `4 N n² b` flops for bandwidth `b`, the eigensolver about `10 n³`.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n_dof() as f64;
        let stepping = 4.0 * self.cfg.n_steps as f64 * n * n * self.system.bandwidth() as f64;
        if stepping <= 10.0 * n * n * n {
            self.probe_dense()
        } else {
            self.modal_matrix()
        }
    }

    /// The same matrix as [`probe_dense`](Self::probe_dense), built from the
    /// eigenpairs `A v = μ M v`. Each step multiplies mode `μ` by
    /// `1/(1 + τμ)`, so `S_{τ,h} = V diag(κ) Vᵀ M` with
    /// `κ(μ) = Σᵢ τ g(tⁱ) (1 + τμ)^{-(N-i+1)}` and `VᵀMV = I`.
    pub fn modal_matrix(&self) -> Result<DMatrix<f64>> {
        let mass = self.cfg.space.mass().to_dense();
        let eig = dense_generalized_eig(&self.stiffness.to_dense(), &mass)?;
        let tau = self.cfg.tau;
        let mut scaled = eig.vectors.clone();
        for (k, mu) in eig.values.iter().enumerate() {
            let r = 1.0 / (1.0 + tau * mu);
            let kappa = self.weights.iter().fold(0.0, |acc, w| r * (acc + w));
            scaled.column_mut(k).scale_mut(kappa);
        }
        Ok(scaled * eig.vectors.transpose() * mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn operator(h: f64, n_steps: usize, solver: StepSolver) -> ForwardOperator {
        let space = FemSpace::with_spacing(h).unwrap();
        let cfg = ForwardConfig::new(space, ProblemCoefficients::default(), n_steps)
            .unwrap()
            .with_step_solver(solver);
        ForwardOperator::new(cfg).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        (0..n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn modal_matrix_matches_probing() {
        let op = operator(0.125, 12, StepSolver::Direct);
        let probed = op.probe_dense().unwrap();
        let modal = op.modal_matrix().unwrap();
        assert!((&probed - &modal).amax() <= 1e-12 * probed.amax());
    }

    #[test]
    fn zero_source() {
        let op = operator(0.25, 4, StepSolver::Direct);
        assert_eq!(op.apply(&[0.0; 9]).unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn linearity() {
        let op = operator(0.125, 8, StepSolver::Direct);
        let f = pseudo_random(op.n_dof(), 1);
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let (u, u2) = (op.apply(&f).unwrap(), op.apply(&f2).unwrap());
        for (a, b) in u.iter().zip(&u2) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn time_step_must_divide_final_time() {
        let space = FemSpace::with_spacing(0.25).unwrap();
        assert!(ForwardConfig::with_time_step(space.clone(), ProblemCoefficients::default(), 0.3).is_err());
        let cfg = ForwardConfig::with_time_step(space, ProblemCoefficients::default(), 0.125).unwrap();
        assert_eq!(cfg.n_steps, 8);
    }

    #[test]
    fn transpose_identity_for_both_step_solvers() {
        for solver in [StepSolver::Direct, StepSolver::Cg { rel_tolerance: 1e-12 }] {
            let op = operator(0.125, 8, solver);
            let n = op.n_dof();
            for seed in 0..5 {
                let f = pseudo_random(n, seed);
                let z = pseudo_random(n, seed + 100);
                let lhs = dot(&op.apply(&f).unwrap(), &z);
                let rhs = dot(&f, &op.apply_transpose(&z).unwrap());
                assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()), "{solver:?}");
            }
        }
    }

    #[test]
    fn cg_and_direct_steps_agree() {
        let a = operator(0.125, 16, StepSolver::Direct);
        let b = operator(0.125, 16, StepSolver::Cg { rel_tolerance: 1e-12 });
        let f = pseudo_random(a.n_dof(), 7);
        let (ua, ub) = (a.apply(&f).unwrap(), b.apply(&f).unwrap());
        let scale = ua.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in ua.iter().zip(&ub) {
            assert!((x - y).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn nonnegative_sources_stay_nonnegative() {
        // τ ≤ h keeps B⁻¹M entrywise nonnegative on this mesh
        let op = operator(1.0 / 16.0, 16, StepSolver::Direct);
        let f: Vec<f64> = pseudo_random(op.n_dof(), 3).iter().map(|v| v + 0.5).collect();
        let mut min = f64::INFINITY;
        op.integrate(&f, |_, u| min = u.iter().copied().fold(min, f64::min)).unwrap();
        assert!(min >= -1e-10, "min {min}");
    }

    #[test]
    fn probe_matches_apply() {
        let op = operator(0.25, 4, StepSolver::Direct);
        let k = op.probe_dense().unwrap();
        let f = pseudo_random(op.n_dof(), 9);
        let u = op.apply(&f).unwrap();
        let ku = &k * nalgebra::DVector::from_column_slice(&f);
        for (a, b) in u.iter().zip(ku.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
