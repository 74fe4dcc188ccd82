use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A spatial coefficient `a(x)` or `c(x)`.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl ScalarField {
    pub fn function(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Function(Arc::new(f))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            ScalarField::Constant(v) => *v,
            ScalarField::Function(f) => f(x, y),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ScalarField::Constant(v) => Some(*v),
            ScalarField::Function(_) => None,
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(v) => write!(f, "Constant({v})"),
            ScalarField::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// The time profile `g(t)` of the separable source `f(x) g(t)`.
#[derive(Clone)]
pub enum TimeSignal {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl TimeSignal {
    pub fn function(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TimeSignal::Function(Arc::new(g))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeSignal::Constant(v) => *v,
            TimeSignal::Function(g) => g(t),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            TimeSignal::Constant(v) => Some(*v),
            TimeSignal::Function(_) => None,
        }
    }
}

impl fmt::Debug for TimeSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSignal::Constant(v) => write!(f, "Constant({v})"),
            TimeSignal::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Coefficients of `∂ₜu − ∇·(a∇u) + c u = f(x) g(t)` on `(0, T)`.
#[derive(Clone, Debug)]
pub struct ProblemCoefficients {
    pub a: ScalarField,
    pub c: ScalarField,
    pub g: TimeSignal,
    pub final_time: f64,
}

impl Default for ProblemCoefficients {
    /// `a = 1`, `c = 0`, `g ≡ 1`, `T = 1`.
    fn default() -> Self {
        Self {
            a: ScalarField::Constant(1.0),
            c: ScalarField::Constant(0.0),
            g: TimeSignal::Constant(1.0),
            final_time: 1.0,
        }
    }
}

impl ProblemCoefficients {
    pub fn validate(&self) -> Result<()> {
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::arg("final time must be positive"));
        }
        if let Some(a) = self.a.as_constant() {
            if !(a > 0.0) {
                return Err(Error::arg("diffusion coefficient must be positive"));
            }
        }
        if let Some(c) = self.c.as_constant() {
            if !(c >= 0.0) {
                return Err(Error::arg("reaction coefficient must be nonnegative"));
            }
        }
        if let Some(g) = self.g.as_constant() {
            if !(g >= 0.0) {
                return Err(Error::arg("time signal must be nonnegative"));
            }
        }
        Ok(())
    }

    /// True for `a ≡ 1`, `c ≡ 0`, where closed-form modes are available.
    pub fn is_unit_laplacian(&self) -> bool {
        self.a.as_constant() == Some(1.0) && self.c.as_constant() == Some(0.0)
    }
}
