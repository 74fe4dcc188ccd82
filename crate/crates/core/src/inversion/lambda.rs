use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{TikhonovResult, TikhonovSolver};

/// `1/2 + d/8`, the power of `λ` matched against `σ n^{-1/2} / ‖f‖`.
pub fn rule_exponent(d: u32) -> f64 {
    0.5 + f64::from(d) / 8.0
}

/// `λ = (σ n^{-1/2} / ‖f*‖)^{1/(1/2 + d/8)}`.
///
/// `σ = 0` returns `0`, which no solver accepts; the caller decides what a
/// noiseless experiment should use instead.
pub fn lambda_rule(sigma: f64, n: usize, f_norm: f64, d: u32) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("noise level must be >= 0, got {sigma}")));
    }
    if n == 0 {
        return Err(Error::arg("the rule needs at least one sensor"));
    }
    if !(f_norm > 0.0) || !f_norm.is_finite() {
        return Err(Error::arg(format!("source norm must be positive, got {f_norm}")));
    }
    if d == 0 {
        return Err(Error::arg("dimension must be positive"));
    }
    let base = sigma / (n as f64).sqrt() / f_norm;
    Ok(base.powf(1.0 / rule_exponent(d)))
}

/// Starting value `λ₀ = n^{-4/(d+4)}`.
pub fn initial_lambda(n: usize, d: u32) -> f64 {
    (n as f64).powf(-4.0 / (f64::from(d) + 4.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectOptions {
    pub dimension: u32,
    /// Overrides `λ₀`.
    pub initial: Option<f64>,
    /// Stop once `|λ_{j+1} − λ_j|` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            dimension: 2,
            initial: None,
            tolerance: 1e-10,
            max_iterations: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The reconstruction vanished or the update left `(0, ∞)`.
    Degenerate,
}

/// One solve of the iteration and the value it proposes next.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaIterate {
    pub lambda: f64,
    pub residual_n: f64,
    pub penalty: f64,
    pub next_lambda: f64,
}

#[derive(Clone, Debug)]
pub struct LambdaTrace {
    pub iterates: Vec<LambdaIterate>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// The last proposed value, `λ_{J+1}`, for a converged run.
    pub lambda: f64,
    /// Reconstruction at the last `λ_J` that was solved for.
    pub result: TikhonovResult,
}

impl LambdaTrace {
    pub fn n_iterations(&self) -> usize {
        self.iterates.len()
    }

    /// Relative defect of `λ^{1/2+d/8} = n^{-1/2} residual / penalty` for the
    /// final pair.
    pub fn identity_defect(&self, n: usize, d: u32) -> f64 {
        let last = self.iterates.last().expect("a trace holds at least one iterate");
        let rhs = last.residual_n / (n as f64).sqrt() / last.penalty;
        (self.lambda.powf(rule_exponent(d)) - rhs).abs() / rhs.abs()
    }
}

/// Self-consistent choice of `λ`: solve, then set
/// `λ_{j+1}^{1/2+d/8} = n^{-1/2} ‖S_{τ,h} f_h − m‖_n / ‖f_h‖_{L²}`.
pub fn select_lambda(
    solver: &dyn TikhonovSolver,
    data: &[f64],
    opts: &SelectOptions,
) -> Result<LambdaTrace> {
    if !(opts.tolerance > 0.0) || opts.max_iterations == 0 {
        return Err(Error::arg("selection needs a positive tolerance and iteration cap"));
    }
    let n = data.len();
    if n == 0 {
        return Err(Error::arg("no data"));
    }
    let power = 1.0 / rule_exponent(opts.dimension);
    let mut lambda = opts.initial.unwrap_or_else(|| initial_lambda(n, opts.dimension));
    let mut iterates = Vec::new();

    loop {
        let result = solver.solve(data, lambda)?;
        let next = if result.penalty > 0.0 {
            (result.residual_n / (n as f64).sqrt() / result.penalty).powf(power)
        } else {
            f64::NAN
        };
        iterates.push(LambdaIterate {
            lambda,
            residual_n: result.residual_n,
            penalty: result.penalty,
            next_lambda: next,
        });
        let stop = if !(next > 0.0 && next.is_finite()) {
            Some(StopReason::Degenerate)
        } else if (next - lambda).abs() < opts.tolerance {
            Some(StopReason::Converged)
        } else if iterates.len() >= opts.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            return Ok(LambdaTrace {
                iterates,
                converged: stop_reason == StopReason::Converged,
                stop_reason,
                lambda: if next.is_finite() { next } else { lambda },
                result,
            });
        }
        lambda = next;
    }
}
