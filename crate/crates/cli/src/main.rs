//! `heat-inverse`: runs one experiment and writes `<out>/<experiment>.csv`
//! and `<out>/<experiment>.json`.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 solver failure,
//! 3 unreadable input or unwritable output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heat_inverse::experiments::{run_experiment, AnyReport, ExperimentConfig, ExperimentKind, SourcePreset};
use heat_inverse::Error;

#[derive(Parser, Debug)]
#[command(name = "heat-inverse", version, about = "Recover a heat source from noisy terminal-time point data")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Compare the forward solver with the closed-form modal solution.
    ForwardCheck,
    /// One Tikhonov reconstruction.
    Invert,
    /// Self-consistent fixed-point choice of the regularisation parameter.
    SelectLambda,
    /// Reconstruct for a list of regularisation parameters.
    LambdaSweep,
    /// Error distribution over independent noise draws.
    McStudy,
    /// Fitted error rate over a ladder of sensor counts.
    RateCheck,
    /// Eigenvalue decay of the forward map.
    EigStudy,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::ForwardCheck => ExperimentKind::ForwardCheck,
            Command::Invert => ExperimentKind::Invert,
            Command::SelectLambda => ExperimentKind::SelectLambda,
            Command::LambdaSweep => ExperimentKind::LambdaSweep,
            Command::McStudy => ExperimentKind::McStudy,
            Command::RateCheck => ExperimentKind::RateCheck,
            Command::EigStudy => ExperimentKind::EigStudy,
        }
    }
}

/// Flags that override values from `--config`.
#[derive(Args, Debug)]
struct Overrides {
    /// JSON experiment manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Mesh width, e.g. `0.03125` or `1/32`.
    #[arg(long, global = true, value_parser = parse_real)]
    h: Option<f64>,

    /// Time step, e.g. `1/64`.
    #[arg(long, global = true, value_parser = parse_real)]
    tau: Option<f64>,

    /// Sensors per side; `n = k²`.
    #[arg(long, global = true)]
    sensors_k: Option<usize>,

    /// Noise standard deviation.
    #[arg(long, global = true, value_parser = parse_real)]
    sigma: Option<f64>,

    /// Regularisation parameter(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_real)]
    lambda: Option<Vec<f64>>,

    #[arg(long, global = true)]
    replications: Option<usize>,

    /// One of p1, p2, p3.
    #[arg(long, global = true)]
    source_preset: Option<String>,
}

/// A float or a fraction `a/b`.
fn parse_real(s: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    match s.split_once('/') {
        Some((a, b)) => Ok(parse(a)? / parse(b)?),
        None => parse(s),
    }
}

fn build_config(cli: &Cli) -> Result<(ExperimentConfig, PathBuf), Error> {
    let o = &cli.overrides;
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = cli.command.kind();
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.h {
        cfg.h = v;
    }
    if let Some(v) = o.tau {
        cfg.tau = v;
    }
    if let Some(v) = o.sensors_k {
        cfg.sensors_k = v;
    }
    if let Some(v) = o.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = &o.lambda {
        cfg.lambdas = Some(v.clone());
    }
    if let Some(v) = o.replications {
        cfg.replications = v;
    }
    if let Some(v) = &o.source_preset {
        cfg.source_preset = v.parse::<SourcePreset>()?;
    }
    if let Some(v) = &o.out {
        cfg.output = Some(v.display().to_string());
    }
    cfg.validate()?;
    let out = PathBuf::from(cfg.output.clone().unwrap_or_else(|| "out".to_string()));
    Ok((cfg, out))
}

fn summary(report: &AnyReport) -> String {
    match report {
        AnyReport::ForwardCheck(r) => format!(
            "sampled relative error {:.3e}, L2 error ratio {:.3}",
            r.levels[0].sampled_rel_err, r.l2_ratio
        ),
        AnyReport::Invert(r) => format!(
            "lambda {:.3e}: pred_err_n {:.3e}, l2_err {:.3e}, residual_n {:.3e}",
            r.lambda, r.metrics.pred_err_n, r.metrics.l2_err, r.metrics.residual_n
        ),
        AnyReport::SelectLambda(r) => format!(
            "lambda {:.4e} after {} iterations ({:?}), residual_n {:.4e}",
            r.lambda,
            r.iterates.len(),
            r.stop_reason,
            r.metrics.residual_n
        ),
        AnyReport::LambdaSweep(r) => format!("argmin lambda {:.1e} over {} values", r.argmin_lambda, r.rows.len()),
        AnyReport::McStudy(r) => format!(
            "{} replications: mean pred_err_n {:.4e}, QQ correlation {}",
            r.records.len(),
            r.aggregates.pred_err_n.mean,
            r.qq_correlation.map_or("undefined".to_string(), |c| format!("{c:.4}"))
        ),
        AnyReport::RateCheck(r) => match r.slope {
            Some(s) => format!("slope {s:.3} over {} rungs", r.rungs.len()),
            None => "insufficient ladder, no slope".to_string(),
        },
        AnyReport::EigStudy(r) => format!(
            "rho_1 {:.2} (limit {:.2}), slope {}",
            r.rho[0],
            r.rho1_limit,
            r.slope.map_or("undefined".to_string(), |s| format!("{s:.3}"))
        ),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let (cfg, out) = build_config(cli)?;
    let report = run_experiment(&cfg)?;
    let (csv, json) = report.emit(&out)?;
    // Ignore a closed stdout; the files are already written.
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}: {}", cfg.experiment, summary(&report));
    let _ = writeln!(stdout, "wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
