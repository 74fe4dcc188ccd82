//! Replicated experiments: the Monte Carlo error distribution and the
//! convergence-rate ladder.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::report::{Report, Table};
use crate::experiments::runs::{noise, single_lambda, DIM};
use crate::experiments::stats::{
    log_log_slope, qq_correlation, qq_pairs, standardize, tail_fraction, Aggregate, Histogram,
    QqPair,
};
use crate::experiments::{ExperimentConfig, Scenario, ScenarioSpec};
use crate::inversion::{error_metrics, lambda_rule};
use crate::sensing::empirical_distance;

/// Standardised errors beyond this many standard deviations count as tail.
pub const TAIL_THRESHOLD: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub index: usize,
    pub seed: u64,
    pub pred_err_n: f64,
    pub l2_err: f64,
    pub hminus1_err: f64,
    pub residual_n: f64,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McAggregates {
    pub pred_err_n: Aggregate,
    pub l2_err: Aggregate,
    pub hminus1_err: Aggregate,
    pub residual_n: Aggregate,
}

impl McAggregates {
    pub fn of(records: &[McRecord]) -> Result<Self> {
        let col = |f: fn(&McRecord) -> f64| -> Result<Aggregate> {
            Aggregate::of(&records.iter().map(f).collect::<Vec<_>>())
        };
        Ok(Self {
            pred_err_n: col(|r| r.pred_err_n)?,
            l2_err: col(|r| r.l2_err)?,
            hminus1_err: col(|r| r.hminus1_err)?,
            residual_n: col(|r| r.residual_n)?,
        })
    }

    fn matches(&self, other: &Self, tol: f64) -> bool {
        self.pred_err_n.matches(&other.pred_err_n, tol)
            && self.l2_err.matches(&other.l2_err, tol)
            && self.hminus1_err.matches(&other.hminus1_err, tol)
            && self.residual_n.matches(&other.residual_n, tol)
    }
}

/// Distribution of the reconstruction error over independent noise draws on
/// a fixed geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: ExperimentConfig,
    pub lambda: f64,
    /// `ρ₀ = ‖f*‖_{L²} + σ n^{-1/2}`
    pub rho0: f64,
    pub records: Vec<McRecord>,
    pub aggregates: McAggregates,
    /// Standardised `pred_err_n` against normal quantiles.
    pub qq: Vec<QqPair>,
    pub qq_correlation: Option<f64>,
    /// Share of standardised `pred_err_n` beyond [`TAIL_THRESHOLD`].
    pub tail_fraction: f64,
    /// Histogram of raw `pred_err_n`.
    pub histogram: Histogram,
}

impl McReport {
    /// Parses a report and checks that the stored aggregates agree with the
    /// records to `1e-12`.
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let parse = |message: String| Error::Parse {
            context: context.to_string(),
            message,
        };
        let report: Self = serde_json::from_str(text)
            .map_err(|e| parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if report.records.len() != report.config.replications {
            return Err(parse(format!(
                "{} records for {} replications",
                report.records.len(),
                report.config.replications
            )));
        }
        let recomputed = McAggregates::of(&report.records).map_err(|e| parse(e.to_string()))?;
        if !report.aggregates.matches(&recomputed, 1e-12) {
            return Err(parse("aggregates disagree with the records".to_string()));
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

impl Report for McReport {
    fn name(&self) -> &'static str {
        "mc_study"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "index",
            "seed",
            "pred_err_n",
            "l2_err",
            "hminus1_err",
            "residual_n",
            "lambda",
        ]);
        for r in &self.records {
            t.push(vec![
                r.index.into(),
                r.seed.into(),
                r.pred_err_n.into(),
                r.l2_err.into(),
                r.hminus1_err.into(),
                r.residual_n.into(),
                r.lambda.into(),
            ]);
        }
        t
    }
}

pub fn run_mc_study(cfg: &ExperimentConfig) -> Result<McReport> {
    cfg.validate()?;
    if cfg.replications < 2 {
        return Err(Error::arg("a Monte Carlo study needs at least two replications"));
    }
    let scenario = Scenario::from_config(cfg)?;
    let n = scenario.n_sensors();
    let lambda = single_lambda(cfg, n)?;
    let solver = scenario.solver(cfg.solver)?;
    let base = noise(cfg);
    let models: Vec<_> = (0..cfg.replications as u64).map(|r| base.for_replication(r)).collect();
    let datasets = models
        .iter()
        .map(|m| scenario.measurements(*m).map(|d| d.values))
        .collect::<Result<Vec<_>>>()?;
    let results = solver.solve_batch(&datasets, lambda)?;
    let records = results
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let m = error_metrics(r, &scenario.f_true, &scenario.truth)?;
            Ok(McRecord {
                index,
                seed: models[index].seed,
                pred_err_n: m.pred_err_n,
                l2_err: m.l2_err,
                hminus1_err: m.hminus1_err,
                residual_n: m.residual_n,
                lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let aggregates = McAggregates::of(&records)?;
    let errors: Vec<f64> = records.iter().map(|r| r.pred_err_n).collect();
    let z = standardize(&errors, &aggregates.pred_err_n);
    let qq = qq_pairs(&z);
    Ok(McReport {
        config: cfg.echo(),
        lambda,
        rho0: cfg.source_preset.l2_norm() + cfg.sigma / (n as f64).sqrt(),
        qq_correlation: qq_correlation(&qq),
        tail_fraction: tail_fraction(&z, TAIL_THRESHOLD),
        histogram: Histogram::new(&errors, cfg.histogram_bins)?,
        qq,
        records,
        aggregates,
    })
}

/// Root of `τ |ln τ| = target` on `(0, 1/e]`, the branch where the map is
/// increasing.
pub fn coupled_time_step(target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::arg("time-step coupling needs a positive target"));
    }
    let g = |t: f64| -t * t.ln();
    let top = (-1.0f64).exp();
    if target >= g(top) {
        return Ok(top);
    }
    let (mut lo, mut hi) = (0.0f64, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Discretisation tied to `λ`: `h ≈ λ^{1/4}`, `τ |ln τ| ≈ λ^{1/2}`.
pub fn coupled_discretization(lambda: f64, final_time: f64) -> Result<(usize, usize)> {
    let r = lambda.powf(-0.25);
    let r = if (r - r.round()).abs() <= 1e-9 * r { r.round() } else { r.ceil() };
    let cells = (r as usize).max(2);
    let tau = coupled_time_step(lambda.sqrt())?;
    let steps = ((final_time / tau).ceil() as usize).max(1);
    Ok((cells, steps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub n: usize,
    pub lambda: f64,
    pub cells: usize,
    pub n_steps: usize,
    pub mean_pred_err: f64,
    pub std_pred_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub config: ExperimentConfig,
    pub rungs: Vec<Rung>,
    /// Slope of `ln mean_pred_err` against `ln λ^{1/2}`.
    pub slope: Option<f64>,
    /// Fewer than two distinct rungs, so no slope.
    pub insufficient_ladder: bool,
}

impl Report for RateReport {
    fn name(&self) -> &'static str {
        "rate_check"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "n",
            "lambda",
            "cells",
            "n_steps",
            "mean_pred_err",
            "std_pred_err",
        ]);
        for r in &self.rungs {
            t.push(vec![
                r.n.into(),
                r.lambda.into(),
                r.cells.into(),
                r.n_steps.into(),
                r.mean_pred_err.into(),
                r.std_pred_err.into(),
            ]);
        }
        t
    }
}

fn run_rung(cfg: &ExperimentConfig, n: usize) -> Result<Rung> {
    let lambda = lambda_rule(cfg.sigma, n, cfg.source_preset.l2_norm(), DIM)?;
    if !(lambda > 0.0) {
        return Err(Error::arg("the rate check needs sigma > 0"));
    }
    let (cells, n_steps) = coupled_discretization(lambda, cfg.final_time)?;
    let scenario = Scenario::new(&ScenarioSpec {
        cells,
        n_steps,
        sensors_k: (n as f64).sqrt().round() as usize,
        preset: cfg.source_preset,
        final_time: cfg.final_time,
        truth_refinement: cfg.truth_refinement,
    })?;
    let solver = scenario.solver(cfg.solver)?;
    let base = noise(cfg);
    let datasets = (0..cfg.replications as u64)
        .map(|r| {
            let model = base.for_replication(r);
            scenario.measurements(model).map(|m| m.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = solver
        .solve_batch(&datasets, lambda)?
        .iter()
        .map(|r| empirical_distance(&scenario.truth, &r.predicted))
        .collect::<Result<Vec<_>>>()?;
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let std = if errors.len() > 1 {
        Aggregate::of(&errors)?.std
    } else {
        0.0
    };
    Ok(Rung {
        n,
        lambda,
        cells,
        n_steps,
        mean_pred_err: mean,
        std_pred_err: std,
    })
}

pub fn run_rate_check(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    let rungs = cfg
        .n_ladder
        .par_iter()
        .map(|&n| run_rung(cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rungs.iter().map(|r| r.lambda.sqrt()).collect();
    let y: Vec<f64> = rungs.iter().map(|r| r.mean_pred_err).collect();
    let slope = log_log_slope(&x, &y);
    Ok(RateReport {
        config: cfg.echo(),
        insufficient_ladder: slope.is_none(),
        slope,
        rungs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            h: 0.125,
            tau: 0.125,
            sensors_k: 8,
            sigma: 1e-3,
            replications: 6,
            ..ExperimentConfig::for_experiment(ExperimentKind::McStudy)
        }
    }

    #[test]
    fn noiseless_replications_coincide() {
        let cfg = ExperimentConfig {
            sigma: 0.0,
            replications: 2,
            lambdas: Some(vec![1e-4]),
            ..small()
        };
        let r = run_mc_study(&cfg).unwrap();
        assert_eq!(r.records[0].pred_err_n, r.records[1].pred_err_n);
        assert_eq!(r.aggregates.pred_err_n.std, 0.0);
        assert_eq!(r.qq_correlation, None);
    }

    #[test]
    fn report_round_trip_verifies_aggregates() {
        let r = run_mc_study(&small()).unwrap();
        let text = crate::json::to_string(&r);
        assert_eq!(McReport::from_json(&text, "mem").unwrap(), r);

        let mut tampered = r.clone();
        tampered.aggregates.l2_err.mean *= 1.0 + 1e-9;
        let text = crate::json::to_string(&tampered);
        assert!(matches!(McReport::from_json(&text, "mem"), Err(Error::Parse { .. })));
    }

    #[test]
    fn one_replication_is_rejected() {
        let cfg = ExperimentConfig {
            replications: 1,
            ..small()
        };
        assert!(run_mc_study(&cfg).is_err());
    }

    #[test]
    fn time_step_coupling() {
        for target in [1e-1, 1e-2, 1e-4] {
            let t = coupled_time_step(target).unwrap();
            assert!((-t * t.ln() - target).abs() <= 1e-12 * target);
        }
        assert_eq!(coupled_time_step(1.0).unwrap(), (-1.0f64).exp());
        let (cells, steps) = coupled_discretization(1e-4, 1.0).unwrap();
        assert_eq!(cells, 10);
        assert!(steps > 100);
    }

    #[test]
    fn single_rung_flags_insufficient_ladder() {
        let cfg = ExperimentConfig {
            n_ladder: vec![16],
            sigma: 0.1,
            replications: 2,
            ..small()
        };
        let r = run_rate_check(&cfg).unwrap();
        assert_eq!(r.rungs.len(), 1);
        assert!(r.insufficient_ladder);
        assert_eq!(r.slope, None);
    }
}
