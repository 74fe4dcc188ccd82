//! Experiment drivers behind the command-line tool.
//!
//! Every driver is a pure function of an [`ExperimentConfig`]: the same
//! configuration, including its master seed, always yields the same report,
//! independent of the number of worker threads. Reports are written as a
//! CSV table plus a JSON summary by [`emit_report`].

mod config;
mod mc;
mod presets;
pub mod report;
mod runs;
mod scenario;
mod spectrum;
pub mod stats;

pub use config::{
    ExperimentConfig, ExperimentKind, SolverKind, DENSE_DOF_LIMIT, SCHEMA_VERSION,
};
pub use mc::{
    coupled_discretization, coupled_time_step, run_mc_study, run_rate_check, McAggregates,
    McRecord, McReport, RateReport, Rung, TAIL_THRESHOLD,
};
pub use presets::{SourcePreset, P1_NORM};
pub use report::{emit_report, Report, Table};
pub use runs::{
    default_sweep, forward_level, run_forward_check, run_invert, run_lambda_sweep,
    run_select_lambda, select_on, sweep_on, ForwardCheckReport, ForwardLevel, InvertReport,
    LambdaSweepReport, NodeValue, SelectLambdaReport, SweepRow, DIM,
};
pub use scenario::{Scenario, ScenarioSpec, Solver};
pub use spectrum::{run_eig_study, SpectralReport, EIG_DOF_LIMIT};

use std::path::{Path, PathBuf};

use crate::error::Result;

/// Output of [`run_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub enum AnyReport {
    ForwardCheck(ForwardCheckReport),
    Invert(InvertReport),
    SelectLambda(SelectLambdaReport),
    LambdaSweep(LambdaSweepReport),
    McStudy(McReport),
    RateCheck(RateReport),
    EigStudy(SpectralReport),
}

impl AnyReport {
    pub fn emit(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        match self {
            AnyReport::ForwardCheck(r) => emit_report(r, dir),
            AnyReport::Invert(r) => emit_report(r, dir),
            AnyReport::SelectLambda(r) => emit_report(r, dir),
            AnyReport::LambdaSweep(r) => emit_report(r, dir),
            AnyReport::McStudy(r) => emit_report(r, dir),
            AnyReport::RateCheck(r) => emit_report(r, dir),
            AnyReport::EigStudy(r) => emit_report(r, dir),
        }
    }
}

/// Runs the experiment named in `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AnyReport> {
    Ok(match cfg.experiment {
        ExperimentKind::ForwardCheck => AnyReport::ForwardCheck(run_forward_check(cfg)?),
        ExperimentKind::Invert => AnyReport::Invert(run_invert(cfg)?),
        ExperimentKind::SelectLambda => AnyReport::SelectLambda(run_select_lambda(cfg)?),
        ExperimentKind::LambdaSweep => AnyReport::LambdaSweep(run_lambda_sweep(cfg)?),
        ExperimentKind::McStudy => AnyReport::McStudy(run_mc_study(cfg)?),
        ExperimentKind::RateCheck => AnyReport::RateCheck(run_rate_check(cfg)?),
        ExperimentKind::EigStudy => AnyReport::EigStudy(run_eig_study(cfg)?),
    })
}
