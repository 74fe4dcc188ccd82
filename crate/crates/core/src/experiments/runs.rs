//! Single-dataset drivers: forward check, one inversion, the fixed-point
//! parameter choice and the `λ` sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::report::{Report, Table};
use crate::experiments::{ExperimentConfig, Scenario, Solver};
use crate::fem::{FemSpace, FieldVector, Mesh};
use crate::forward::{ForwardConfig, ForwardOperator, SpectralMode};
use crate::inversion::{
    error_metrics, lambda_rule, select_lambda, ErrorMetrics, LambdaIterate, SelectOptions,
    StopReason, TikhonovSolver,
};
use crate::sensing::{empirical_distance, empirical_norm, NoiseModel, SensorSet};

/// Spatial dimension of the unit square.
pub const DIM: u32 = 2;

pub(crate) fn noise(cfg: &ExperimentConfig) -> NoiseModel {
    NoiseModel {
        kind: cfg.noise_kind,
        sigma: cfg.sigma,
        seed: cfg.seed,
    }
}

/// The rule value for this configuration, `None` for noiseless data.
pub(crate) fn rule_lambda(cfg: &ExperimentConfig, n: usize) -> Result<Option<f64>> {
    let l = lambda_rule(cfg.sigma, n, cfg.source_preset.l2_norm(), DIM)?;
    Ok((l > 0.0).then_some(l))
}

/// First listed `λ`, or the rule value.
pub(crate) fn single_lambda(cfg: &ExperimentConfig, n: usize) -> Result<f64> {
    if let Some(l) = cfg.lambdas.as_ref().and_then(|l| l.first()) {
        return Ok(*l);
    }
    rule_lambda(cfg, n)?.ok_or_else(|| {
        Error::arg("the parameter rule gives λ = 0 for noiseless data; pass an explicit λ")
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardLevel {
    pub h: f64,
    pub tau: f64,
    pub n_steps: usize,
    /// `‖u_h^N − u(T)‖_n / ‖u(T)‖_n` at the sensors.
    pub sampled_rel_err: f64,
    /// `‖u_h^N − u(T)‖_{L²}`
    pub l2_err: f64,
}

/// Discrete terminal state of `f = sin(πx) sin(πy)` against `α f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardCheckReport {
    pub config: ExperimentConfig,
    pub alpha: f64,
    /// The configured `(h, τ)` and then `(h/2, τ/4)`.
    pub levels: Vec<ForwardLevel>,
    /// `l2_err` of the first level over the second.
    pub l2_ratio: f64,
}

impl Report for ForwardCheckReport {
    fn name(&self) -> &'static str {
        "forward_check"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["h", "tau", "n_steps", "sampled_rel_err", "l2_err"]);
        for l in &self.levels {
            t.push(vec![
                l.h.into(),
                l.tau.into(),
                l.n_steps.into(),
                l.sampled_rel_err.into(),
                l.l2_err.into(),
            ]);
        }
        t
    }
}

/// Forward solver against the closed-form solution for one level.
pub fn forward_level(
    cells: usize,
    n_steps: usize,
    sensors: &SensorSet,
    coeff: &crate::fem::ProblemCoefficients,
) -> Result<ForwardLevel> {
    let mode = SpectralMode::new(1, 1, coeff)?;
    let space = FemSpace::new(Mesh::with_cells(cells)?);
    let fwd = ForwardOperator::new(ForwardConfig::new(space.clone(), coeff.clone(), n_steps)?)?;
    let f = FieldVector::project_l2(&space, |x, y| mode.shape(x, y))?;
    let u = fwd.solve(&f)?;
    let exact = |x: f64, y: f64| mode.alpha * mode.shape(x, y);
    let sampled = u.evaluate_at_points(sensors.points())?;
    let reference: Vec<f64> = sensors.points().iter().map(|p| exact(p[0], p[1])).collect();
    Ok(ForwardLevel {
        h: 1.0 / cells as f64,
        tau: fwd.config().tau,
        n_steps,
        sampled_rel_err: empirical_distance(&sampled, &reference)? / empirical_norm(&reference)?,
        l2_err: u.l2_distance_to(exact),
    })
}

pub fn run_forward_check(cfg: &ExperimentConfig) -> Result<ForwardCheckReport> {
    cfg.validate()?;
    let coeff = crate::fem::ProblemCoefficients {
        final_time: cfg.final_time,
        ..Default::default()
    };
    let sensors = SensorSet::uniform(cfg.sensors_k)?;
    let (cells, steps) = (cfg.cells()?, cfg.n_steps()?);
    let levels = vec![
        forward_level(cells, steps, &sensors, &coeff)?,
        forward_level(2 * cells, 4 * steps, &sensors, &coeff)?,
    ];
    Ok(ForwardCheckReport {
        config: cfg.echo(),
        alpha: SpectralMode::new(1, 1, &coeff)?.alpha,
        l2_ratio: levels[0].l2_err / levels[1].l2_err,
        levels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeValue {
    pub x: f64,
    pub y: f64,
    pub f_h: f64,
    pub f_true: f64,
}

/// One Tikhonov reconstruction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertReport {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub dense_solver: bool,
    pub metrics: ErrorMetrics,
    pub penalty: f64,
    pub objective: f64,
    pub cg_iterations: usize,
    /// Nodal values, written to the CSV only.
    #[serde(skip)]
    pub nodes: Vec<NodeValue>,
}

impl Report for InvertReport {
    fn name(&self) -> &'static str {
        "invert"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["x", "y", "f_h", "f_true"]);
        for v in &self.nodes {
            t.push(vec![v.x.into(), v.y.into(), v.f_h.into(), v.f_true.into()]);
        }
        t
    }
}

pub fn run_invert(cfg: &ExperimentConfig) -> Result<InvertReport> {
    let scenario = Scenario::from_config(cfg)?;
    let lambda = single_lambda(cfg, scenario.n_sensors())?;
    let data = scenario.measurements(noise(cfg))?.values;
    let solver = scenario.solver(cfg.solver)?;
    let r = solver.solve(&data, lambda)?;
    let metrics = error_metrics(&r, &scenario.f_true, &scenario.truth)?;
    let mesh = scenario.observation.forward().space().mesh();
    let nodes = (0..mesh.n_dof())
        .map(|d| {
            let p = mesh.dof_point(d);
            NodeValue {
                x: p[0],
                y: p[1],
                f_h: r.f_h.coeffs()[d],
                f_true: scenario.f_true.coeffs()[d],
            }
        })
        .collect();
    Ok(InvertReport {
        config: cfg.echo(),
        lambda,
        dense_solver: solver.is_dense(),
        metrics,
        penalty: r.penalty,
        objective: r.objective,
        cg_iterations: r.cg_iterations,
        nodes,
    })
}

/// History of the fixed-point parameter choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectLambdaReport {
    pub config: ExperimentConfig,
    pub iterates: Vec<LambdaIterate>,
    pub lambda: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Relative defect of the update identity for the final pair.
    pub identity_defect: f64,
    pub rule_lambda: Option<f64>,
    /// Metrics of the last reconstruction.
    pub metrics: ErrorMetrics,
}

impl Report for SelectLambdaReport {
    fn name(&self) -> &'static str {
        "select_lambda"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["j", "lambda", "residual_n", "penalty", "next_lambda"]);
        for (j, it) in self.iterates.iter().enumerate() {
            t.push(vec![
                j.into(),
                it.lambda.into(),
                it.residual_n.into(),
                it.penalty.into(),
                it.next_lambda.into(),
            ]);
        }
        t
    }
}

/// Runs the fixed-point choice on an existing scenario and dataset.
pub fn select_on(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    solver: &Solver,
    data: &[f64],
) -> Result<SelectLambdaReport> {
    let opts = SelectOptions {
        dimension: DIM,
        initial: cfg.lambdas.as_ref().and_then(|l| l.first().copied()),
        ..SelectOptions::default()
    };
    let trace = select_lambda(solver, data, &opts)?;
    let n = data.len();
    Ok(SelectLambdaReport {
        config: cfg.echo(),
        identity_defect: trace.identity_defect(n, DIM),
        metrics: error_metrics(&trace.result, &scenario.f_true, &scenario.truth)?,
        lambda: trace.lambda,
        converged: trace.converged,
        stop_reason: trace.stop_reason,
        rule_lambda: rule_lambda(cfg, n)?,
        iterates: trace.iterates,
    })
}

pub fn run_select_lambda(cfg: &ExperimentConfig) -> Result<SelectLambdaReport> {
    let scenario = Scenario::from_config(cfg)?;
    let data = scenario.measurements(noise(cfg))?.values;
    let solver = scenario.solver(cfg.solver)?;
    select_on(cfg, &scenario, &solver, &data)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub pred_err_n: f64,
    pub l2_err: f64,
    pub hminus1_err: f64,
    pub residual_n: f64,
    pub penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSweepReport {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    /// `λ` with the smallest `pred_err_n`.
    pub argmin_lambda: f64,
    pub rule_lambda: Option<f64>,
}

impl Report for LambdaSweepReport {
    fn name(&self) -> &'static str {
        "lambda_sweep"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "lambda",
            "pred_err_n",
            "l2_err",
            "hminus1_err",
            "residual_n",
            "penalty",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.lambda.into(),
                r.pred_err_n.into(),
                r.l2_err.into(),
                r.hminus1_err.into(),
                r.residual_n.into(),
                r.penalty.into(),
            ]);
        }
        t
    }
}

/// `10⁻¹, …, 10⁻¹⁰`
pub fn default_sweep() -> Vec<f64> {
    (1..=10).map(|k| 10f64.powi(-k)).collect()
}

/// Sweeps `lambdas` on an existing scenario and dataset.
pub fn sweep_on(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    solver: &Solver,
    data: &[f64],
    lambdas: &[f64],
) -> Result<LambdaSweepReport> {
    if lambdas.is_empty() {
        return Err(Error::arg("lambda list is empty"));
    }
    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let r = solver.solve(data, lambda)?;
            let m = error_metrics(&r, &scenario.f_true, &scenario.truth)?;
            Ok(SweepRow {
                lambda,
                pred_err_n: m.pred_err_n,
                l2_err: m.l2_err,
                hminus1_err: m.hminus1_err,
                residual_n: m.residual_n,
                penalty: r.penalty,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmin_lambda = rows
        .iter()
        .min_by(|a, b| a.pred_err_n.total_cmp(&b.pred_err_n))
        .map(|r| r.lambda)
        .expect("at least one row");
    Ok(LambdaSweepReport {
        config: cfg.echo(),
        rows,
        argmin_lambda,
        rule_lambda: rule_lambda(cfg, data.len())?,
    })
}

pub fn run_lambda_sweep(cfg: &ExperimentConfig) -> Result<LambdaSweepReport> {
    let scenario = Scenario::from_config(cfg)?;
    let data = scenario.measurements(noise(cfg))?.values;
    let solver = scenario.solver(cfg.solver)?;
    let lambdas = cfg.lambdas.clone().unwrap_or_else(default_sweep);
    sweep_on(cfg, &scenario, &solver, &data, &lambdas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, SourcePreset};

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            h: 0.125,
            tau: 0.125,
            sensors_k: 10,
            sigma: 1e-3,
            ..ExperimentConfig::for_experiment(kind)
        }
    }

    #[test]
    fn forward_check_small() {
        let r = run_forward_check(&small(ExperimentKind::ForwardCheck)).unwrap();
        assert_eq!(r.levels.len(), 2);
        assert!(r.levels[1].l2_err < r.levels[0].l2_err);
        assert!(r.levels[0].sampled_rel_err < 0.2);
    }

    #[test]
    fn single_lambda_sweep() {
        let cfg = ExperimentConfig {
            lambdas: Some(vec![1e-3]),
            ..small(ExperimentKind::LambdaSweep)
        };
        let r = run_lambda_sweep(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.argmin_lambda, 1e-3);
    }

    #[test]
    fn noiseless_rule_is_rejected() {
        let cfg = ExperimentConfig {
            sigma: 0.0,
            ..small(ExperimentKind::Invert)
        };
        assert!(matches!(run_invert(&cfg), Err(Error::Argument(_))));
    }

    #[test]
    fn invert_reports_every_node() {
        let cfg = ExperimentConfig {
            source_preset: SourcePreset::P2,
            ..small(ExperimentKind::Invert)
        };
        let r = run_invert(&cfg).unwrap();
        assert_eq!(r.nodes.len(), 49);
        assert_eq!(r.table().rows.len(), 49);
        assert!(r.metrics.l2_err < 0.5);
    }

    #[test]
    fn select_lambda_small() {
        let r = run_select_lambda(&small(ExperimentKind::SelectLambda)).unwrap();
        assert!(r.converged);
        assert!(r.identity_defect < 1e-8);
        assert_eq!(r.table().rows.len(), r.iterates.len());
    }
}
