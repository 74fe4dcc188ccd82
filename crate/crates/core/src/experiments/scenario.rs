use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::experiments::{ExperimentConfig, SolverKind, SourcePreset, DENSE_DOF_LIMIT};
use crate::fem::{FemSpace, FieldVector, Mesh, ProblemCoefficients};
use crate::forward::{ForwardConfig, ForwardOperator, ObservationOperator};
use crate::inversion::{
    MatrixFreeTikhonov, ProbedTikhonov, TikhonovResult, TikhonovSolver,
};
use crate::linalg::CgConfig;
use crate::sensing::{generate_measurements, MeasurementSet, NoiseModel, SensorSet, TruthSource};

/// Geometry, discretisation and noiseless data of one experiment.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub coeff: ProblemCoefficients,
    pub preset: SourcePreset,
    pub sensors: SensorSet,
    pub observation: ObservationOperator,
    /// `f*` projected onto the inversion mesh.
    pub f_true: FieldVector,
    /// `(S f*)(xᵢ)`: closed form for spectral presets, otherwise a forward
    /// solve refined `truth_refinement` times in space and time.
    pub truth: Vec<f64>,
}

/// Mesh, time grid and layout of a [`Scenario`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub cells: usize,
    pub n_steps: usize,
    pub sensors_k: usize,
    pub preset: SourcePreset,
    pub final_time: f64,
    pub truth_refinement: usize,
}

impl ScenarioSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cells: cfg.cells()?,
            n_steps: cfg.n_steps()?,
            sensors_k: cfg.sensors_k,
            preset: cfg.source_preset,
            final_time: cfg.final_time,
            truth_refinement: cfg.truth_refinement,
        })
    }
}

fn forward(cells: usize, n_steps: usize, coeff: &ProblemCoefficients) -> Result<ForwardOperator> {
    let space = FemSpace::new(Mesh::with_cells(cells)?);
    ForwardOperator::new(ForwardConfig::new(space, coeff.clone(), n_steps)?)
}

impl Scenario {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        let coeff = ProblemCoefficients {
            final_time: spec.final_time,
            ..ProblemCoefficients::default()
        };
        let preset = spec.preset;
        let sensors = SensorSet::uniform(spec.sensors_k)?;
        let fwd = Arc::new(forward(spec.cells, spec.n_steps, &coeff)?);
        let observation = ObservationOperator::new(fwd.clone(), &sensors)?;
        let f_true = FieldVector::project_l2(fwd.space(), |x, y| preset.eval(x, y))?;

        let truth = match preset.spectral() {
            Some(source) => TruthSource::Spectral {
                coeff: &coeff,
                source: &source,
            }
            .evaluate(&sensors)?,
            None => {
                let r = spec.truth_refinement;
                let fine = forward(spec.cells * r, spec.n_steps * r, &coeff)?;
                let f = FieldVector::project_l2(fine.space(), |x, y| preset.eval(x, y))?;
                TruthSource::Fem {
                    forward: &fine,
                    source: &f,
                }
                .evaluate(&sensors)?
            }
        };
        Ok(Self {
            coeff,
            preset,
            sensors,
            observation,
            f_true,
            truth,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Self::new(&ScenarioSpec::from_config(cfg)?)
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn n_dof(&self) -> usize {
        self.observation.n_dof()
    }

    pub fn measurements(&self, noise: NoiseModel) -> Result<MeasurementSet> {
        generate_measurements(&TruthSource::Values(&self.truth), &self.sensors, noise)
    }

    pub fn solver(&self, kind: SolverKind) -> Result<Solver> {
        let dense = match kind {
            SolverKind::Dense => true,
            SolverKind::MatrixFree => false,
            SolverKind::Auto => self.n_dof() <= DENSE_DOF_LIMIT,
        };
        Ok(if dense {
            Solver::Dense(ProbedTikhonov::new(self.observation.clone())?)
        } else {
            Solver::MatrixFree(MatrixFreeTikhonov::new(
                self.observation.clone(),
                CgConfig::default(),
            ))
        })
    }
}

/// Either Tikhonov backend, chosen at run time.
#[derive(Clone, Debug)]
pub enum Solver {
    Dense(ProbedTikhonov),
    MatrixFree(MatrixFreeTikhonov),
}

impl Solver {
    /// One solve per dataset with a shared `λ`, in parallel; the dense
    /// backend factorises once.
    pub fn solve_batch(&self, datasets: &[Vec<f64>], lambda: f64) -> Result<Vec<TikhonovResult>> {
        match self {
            Solver::Dense(p) => {
                let fac = p.factor(lambda)?;
                datasets.par_iter().map(|d| fac.solve(d)).collect()
            }
            Solver::MatrixFree(m) => datasets.par_iter().map(|d| m.solve(d, lambda)).collect(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Solver::Dense(_))
    }
}

impl TikhonovSolver for Solver {
    fn observation(&self) -> &ObservationOperator {
        match self {
            Solver::Dense(p) => p.observation(),
            Solver::MatrixFree(m) => m.observation(),
        }
    }

    fn solve(&self, data: &[f64], lambda: f64) -> Result<TikhonovResult> {
        match self {
            Solver::Dense(p) => p.solve(data, lambda),
            Solver::MatrixFree(m) => m.solve(data, lambda),
        }
    }
}
