use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FieldVector, Point, ProblemCoefficients};
use crate::forward::{spectral_oracle, ForwardOperator, SpectralSource};
use crate::sensing::{NoiseModel, SensorSet};

/// Noisy data `m_i = (S f*)(x_i) + e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub sensors: SensorSet,
    pub values: Vec<f64>,
    /// Noiseless values `(S f*)(x_i)` when known.
    pub truth: Option<Vec<f64>>,
    pub noise: NoiseModel,
}

/// Where the noiseless values come from.
pub enum TruthSource<'a> {
    /// Finite element forward solve, ideally on a mesh finer than the one
    /// used for inversion.
    Fem {
        forward: &'a ForwardOperator,
        source: &'a FieldVector,
    },
    /// Closed-form modal solution (unit Laplacian only).
    Spectral {
        coeff: &'a ProblemCoefficients,
        source: &'a SpectralSource,
    },
    /// Precomputed values in sensor order.
    Values(&'a [f64]),
}

impl TruthSource<'_> {
    pub fn evaluate(&self, sensors: &SensorSet) -> Result<Vec<f64>> {
        match self {
            TruthSource::Fem { forward, source } => {
                forward.solve(source)?.evaluate_at_points(sensors.points())
            }
            TruthSource::Spectral { coeff, source } => {
                spectral_oracle(coeff, source, sensors.points())
            }
            TruthSource::Values(v) => {
                if v.len() != sensors.len() {
                    return Err(Error::arg("truth values do not match the sensor count"));
                }
                Ok(v.to_vec())
            }
        }
    }
}

impl MeasurementSet {
    /// `truth + e` with `e` drawn from `noise`.
    pub fn from_truth(sensors: SensorSet, truth: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        if truth.len() != sensors.len() {
            return Err(Error::arg("truth values do not match the sensor count"));
        }
        let e = noise.draw(truth.len())?;
        let values = truth.iter().zip(&e).map(|(t, e)| t + e).collect();
        Ok(Self {
            sensors,
            values,
            truth: Some(truth),
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Realised noise `m - truth`, if the truth is stored.
    pub fn noise_draws(&self) -> Option<Vec<f64>> {
        self.truth
            .as_ref()
            .map(|t| self.values.iter().zip(t).map(|(m, t)| m - t).collect())
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(&MeasurementFile {
            n: self.len(),
            sensor_points: self.sensors.points().to_vec(),
            values: self.values.clone(),
            truth: self.truth.clone(),
            noise: self.noise,
        })
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let file: MeasurementFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        let field_err = |field: &str, found: usize| Error::Parse {
            context: context.to_string(),
            message: format!("field `{field}`: header says n = {} but found {found} entries", file.n),
        };
        if file.sensor_points.len() != file.n {
            return Err(field_err("sensor_points", file.sensor_points.len()));
        }
        if file.values.len() != file.n {
            return Err(field_err("values", file.values.len()));
        }
        if let Some(t) = &file.truth {
            if t.len() != file.n {
                return Err(field_err("truth", t.len()));
            }
        }
        let sensors = SensorSet::new(file.sensor_points)?;
        Ok(Self {
            sensors,
            values: file.values,
            truth: file.truth,
            noise: file.noise,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

/// `generate_measurements`: noiseless values from `truth` plus seeded noise.
pub fn generate_measurements(
    truth: &TruthSource<'_>,
    sensors: &SensorSet,
    noise: NoiseModel,
) -> Result<MeasurementSet> {
    let values = truth.evaluate(sensors)?;
    MeasurementSet::from_truth(sensors.clone(), values, noise)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementFile {
    n: usize,
    sensor_points: Vec<Point>,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Vec<f64>>,
    noise: NoiseModel,
}
