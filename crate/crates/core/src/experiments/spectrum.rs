//! Decay of the eigenvalues `ρ_k` of `(ψ, v)_{L²} = ρ (Sψ, Sv)_{L²}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::report::{Report, Table};
use crate::experiments::runs::DIM;
use crate::experiments::stats::log_log_slope;
use crate::experiments::ExperimentConfig;
use crate::fem::{FemSpace, Mesh, ProblemCoefficients};
use crate::forward::{ForwardConfig, ForwardOperator, SpectralMode};
use crate::linalg::dense_generalized_eig;

/// Largest problem the dense study accepts.
pub const EIG_DOF_LIMIT: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub config: ExperimentConfig,
    pub k: Vec<usize>,
    /// `ρ_1 ≤ ρ_2 ≤ …`
    pub rho: Vec<f64>,
    /// Slope of `ln ρ_k` against `ln k` over `k = 2..=k_max`.
    pub slope: Option<f64>,
    /// `4/d`
    pub reference_slope: f64,
    /// Continuum value of `ρ_1`, `α_{1,1}⁻²`.
    pub rho1_limit: f64,
}

impl Report for SpectralReport {
    fn name(&self) -> &'static str {
        "eig_study"
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["k", "rho"]);
        for (k, rho) in self.k.iter().zip(&self.rho) {
            t.push(vec![(*k).into(), (*rho).into()]);
        }
        t
    }
}

/// Probes `S_{τ,h}` on every hat function, forms `G = Kᵀ M K` with
/// `G_{jk} = (Sφ_j, Sφ_k)_{L²}` and solves `M v = ρ G v` as
/// `G v = ν M v`, `ρ = 1/ν`, which keeps the well-conditioned `M` on the
/// right.
pub fn run_eig_study(cfg: &ExperimentConfig) -> Result<SpectralReport> {
    cfg.validate()?;
    let coeff = ProblemCoefficients {
        final_time: cfg.final_time,
        ..ProblemCoefficients::default()
    };
    let space = FemSpace::new(Mesh::with_cells(cfg.cells()?)?);
    if space.n_dof() > EIG_DOF_LIMIT {
        return Err(Error::arg(format!(
            "the dense spectral study is limited to {EIG_DOF_LIMIT} unknowns, h = {} gives {}",
            cfg.h,
            space.n_dof()
        )));
    }
    let fwd = ForwardOperator::new(ForwardConfig::new(space.clone(), coeff.clone(), cfg.n_steps()?)?)?;
    let k = fwd.probe_dense()?;
    let m = space.mass().to_dense();
    let mut g = k.transpose() * &m * &k;
    g = (&g + g.transpose()) * 0.5;
    let eig = dense_generalized_eig(&g, &m)?;

    let modes = cfg.eig_modes.min(space.n_dof());
    let rho: Vec<f64> = eig.values.iter().rev().take(modes).map(|nu| 1.0 / nu).collect();
    if rho.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::Solver {
            solver: "dense generalized eigensolver",
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let ks: Vec<usize> = (1..=modes).collect();
    let x: Vec<f64> = ks[1..].iter().map(|k| *k as f64).collect();
    let slope = log_log_slope(&x, &rho[1..]);
    let alpha = SpectralMode::new(1, 1, &coeff)?.alpha;
    Ok(SpectralReport {
        config: cfg.echo(),
        k: ks,
        rho,
        slope,
        reference_slope: 4.0 / f64::from(DIM),
        rho1_limit: alpha.powi(-2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn coarse_spectrum_is_ascending() {
        let cfg = ExperimentConfig {
            h: 0.125,
            tau: 0.0625,
            eig_modes: 10,
            ..ExperimentConfig::for_experiment(ExperimentKind::EigStudy)
        };
        let r = run_eig_study(&cfg).unwrap();
        assert_eq!(r.rho.len(), 10);
        assert!(r.rho.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)));
        assert!((r.rho[0] / r.rho1_limit - 1.0).abs() < 0.1);
    }

    #[test]
    fn too_fine_mesh_rejected() {
        let cfg = ExperimentConfig {
            h: 1.0 / 32.0,
            ..ExperimentConfig::for_experiment(ExperimentKind::EigStudy)
        };
        assert!(matches!(run_eig_study(&cfg), Err(Error::Argument(_))));
    }
}
