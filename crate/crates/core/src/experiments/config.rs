use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::SourcePreset;
use crate::sensing::NoiseKind;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ForwardCheck,
    Invert,
    SelectLambda,
    LambdaSweep,
    McStudy,
    RateCheck,
    EigStudy,
}

impl ExperimentKind {
    /// File stem of the emitted report.
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::ForwardCheck => "forward_check",
            ExperimentKind::Invert => "invert",
            ExperimentKind::SelectLambda => "select_lambda",
            ExperimentKind::LambdaSweep => "lambda_sweep",
            ExperimentKind::McStudy => "mc_study",
            ExperimentKind::RateCheck => "rate_check",
            ExperimentKind::EigStudy => "eig_study",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .map_err(|_| Error::arg(format!("unknown experiment `{s}`")))
    }
}

/// Which Tikhonov solver the drivers use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Dense up to [`DENSE_DOF_LIMIT`] unknowns, matrix-free above.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

pub const DENSE_DOF_LIMIT: usize = 1600;

/// One experiment manifest. Every field has a default, so a file only needs
/// the values it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    /// Mesh width; `1/h` must be an integer.
    pub h: f64,
    /// Time step; `final_time / tau` must be an integer.
    pub tau: f64,
    pub final_time: f64,
    /// Sensors on a `k × k` grid of cell centres, `n = k²`.
    pub sensors_k: usize,
    pub sigma: f64,
    pub noise_kind: NoiseKind,
    /// Explicit `λ` values. `None` means the a-priori rule, or the decades
    /// `10⁻¹ … 10⁻¹⁰` for a sweep.
    pub lambdas: Option<Vec<f64>>,
    pub replications: usize,
    pub seed: u64,
    pub source_preset: SourcePreset,
    /// Sensor counts for the rate check; each must be a perfect square.
    pub n_ladder: Vec<usize>,
    /// Synthetic data come from a forward solve refined by this factor in
    /// space and time.
    pub truth_refinement: usize,
    pub solver: SolverKind,
    /// Number of eigenvalues reported by the spectral study.
    pub eig_modes: usize,
    pub histogram_bins: usize,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::LambdaSweep,
            h: 1.0 / 32.0,
            tau: 1.0 / 64.0,
            final_time: 1.0,
            sensors_k: 100,
            sigma: 0.01,
            noise_kind: NoiseKind::Gaussian,
            lambdas: None,
            replications: 20,
            seed: 1,
            source_preset: SourcePreset::P1,
            n_ladder: vec![2_500, 10_000, 40_000],
            truth_refinement: 2,
            solver: SolverKind::Auto,
            eig_modes: 20,
            histogram_bins: 20,
            output: None,
        }
    }
}

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let k = r.round();
    if !(den > 0.0) || !r.is_finite() || k < 1.0 || (r - k).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::arg(format!("{what}: {num}/{den} is not a positive integer")));
    }
    Ok(k as usize)
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                context: context.to_string(),
                message: format!(
                    "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                    cfg.schema_version
                ),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// The configuration as recorded in reports: everything that affects the
    /// numbers, without the output location.
    pub fn echo(&self) -> Self {
        Self {
            output: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    /// Mesh cells per side.
    pub fn cells(&self) -> Result<usize> {
        let m = integer_ratio(1.0, self.h, "h")?;
        if m < 2 {
            return Err(Error::arg("h must be at most 1/2"));
        }
        Ok(m)
    }

    pub fn n_steps(&self) -> Result<usize> {
        integer_ratio(self.final_time, self.tau, "tau")
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors_k * self.sensors_k
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::arg(format!("unsupported schema_version {}", self.schema_version)));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::arg("final_time must be positive"));
        }
        self.cells()?;
        self.n_steps()?;
        if self.sensors_k < 2 {
            return Err(Error::arg("sensors_k must be at least 2"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::arg("sigma must be >= 0"));
        }
        if let Some(l) = &self.lambdas {
            if l.is_empty() {
                return Err(Error::arg("lambda list is empty"));
            }
            if let Some(bad) = l.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::arg(format!("lambda values must be positive, got {bad}")));
            }
        }
        if self.replications == 0 {
            return Err(Error::arg("replications must be at least 1"));
        }
        if self.truth_refinement == 0 {
            return Err(Error::arg("truth_refinement must be at least 1"));
        }
        if self.eig_modes < 3 {
            return Err(Error::arg("eig_modes must be at least 3"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::arg("histogram_bins must be at least 1"));
        }
        if self.n_ladder.is_empty() {
            return Err(Error::arg("n_ladder is empty"));
        }
        for &n in &self.n_ladder {
            let k = (n as f64).sqrt().round() as usize;
            if k < 2 || k * k != n {
                return Err(Error::arg(format!("ladder entry {n} is not a square k² with k >= 2")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.cells().unwrap(), 32);
        assert_eq!(c.n_steps().unwrap(), 64);
        assert_eq!(c.n_sensors(), 10_000);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = ExperimentConfig::from_json(r#"{"schema_version": 1, "sigma": 0.1}"#, "x").unwrap();
        assert_eq!(c.sigma, 0.1);
        assert_eq!(c.sensors_k, 100);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig {
            lambdas: Some(vec![1e-3, 1e-4]),
            ..ExperimentConfig::for_experiment(ExperimentKind::McStudy)
        };
        assert_eq!(ExperimentConfig::from_json(&c.to_json(), "x").unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            ExperimentConfig { h: 0.3, ..Default::default() },
            ExperimentConfig { tau: 0.3, ..Default::default() },
            ExperimentConfig { replications: 0, ..Default::default() },
            ExperimentConfig { sigma: -1.0, ..Default::default() },
            ExperimentConfig { lambdas: Some(vec![]), ..Default::default() },
            ExperimentConfig { lambdas: Some(vec![0.0]), ..Default::default() },
            ExperimentConfig { n_ladder: vec![10], ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Argument(_))), "{c:?}");
        }
    }

    #[test]
    fn unknown_field_and_schema_are_parse_errors() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"sigmaa": 1}"#, "x"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"schema_version": 7}"#, "x"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn experiment_names() {
        assert_eq!("mc-study".parse::<ExperimentKind>().unwrap(), ExperimentKind::McStudy);
        assert_eq!(ExperimentKind::EigStudy.to_string(), "eig_study");
    }
}
