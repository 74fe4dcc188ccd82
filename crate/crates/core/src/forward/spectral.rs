//! Closed-form solutions for `a = 1`, `c = 0`.
//!
//! The Dirichlet eigenfunctions of the unit square are
//! `sin(pπx) sin(qπy)` with eigenvalues `μ = π²(p² + q²)`. A source
//! `f = φ_{p,q}` produces the terminal state `α φ_{p,q}` with
//! `α = ∫₀ᵀ e^{-μ(T-s)} g(s) ds`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::{Point, ProblemCoefficients, TimeSignal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralMode {
    pub p: u32,
    pub q: u32,
    pub mu: f64,
    pub alpha: f64,
}

impl SpectralMode {
    pub fn new(p: u32, q: u32, coeff: &ProblemCoefficients) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::arg("mode indices must be positive"));
        }
        if !coeff.is_unit_laplacian() {
            return Err(Error::arg(
                "closed-form modes need constant coefficients a = 1, c = 0",
            ));
        }
        let mu = PI * PI * f64::from(p * p + q * q);
        Ok(Self {
            p,
            q,
            mu,
            alpha: modal_alpha(mu, &coeff.g, coeff.final_time),
        })
    }

    pub fn shape(&self, x: f64, y: f64) -> f64 {
        (f64::from(self.p) * PI * x).sin() * (f64::from(self.q) * PI * y).sin()
    }
}

/// `∫₀ᵀ e^{-μ(T-s)} g(s) ds`, exact for constant `g` and adaptive Simpson
/// otherwise.
pub fn modal_alpha(mu: f64, g: &TimeSignal, final_time: f64) -> f64 {
    match g {
        TimeSignal::Constant(c) => c * (-(-mu * final_time).exp_m1()) / mu,
        TimeSignal::Function(_) => {
            let f = |s: f64| (-mu * (final_time - s)).exp() * g.eval(s);
            adaptive_simpson(&f, 0.0, final_time, 1e-13)
        }
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// A finite sine series `f = Σ w_k sin(p_kπx) sin(q_kπy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSource {
    pub terms: Vec<(u32, u32, f64)>,
}

impl SpectralSource {
    pub fn single(p: u32, q: u32) -> Self {
        Self {
            terms: vec![(p, q, 1.0)],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, q, w)| w * (f64::from(p) * PI * x).sin() * (f64::from(q) * PI * y).sin())
            .sum()
    }

    /// Exact `L²(Ω)` norm (modes are orthogonal with squared norm 1/4).
    pub fn l2_norm(&self) -> f64 {
        let mut acc = std::collections::BTreeMap::new();
        for &(p, q, w) in &self.terms {
            *acc.entry((p, q)).or_insert(0.0) += w;
        }
        (acc.values().map(|w: &f64| w * w).sum::<f64>() / 4.0).sqrt()
    }
}

/// Exact terminal values `(S f)(points)` for a sine-series source.
pub fn spectral_oracle(
    coeff: &ProblemCoefficients,
    source: &SpectralSource,
    points: &[Point],
) -> Result<Vec<f64>> {
    let modes = source
        .terms
        .iter()
        .map(|&(p, q, w)| SpectralMode::new(p, q, coeff).map(|m| (m, w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(points
        .iter()
        .map(|&[x, y]| modes.iter().map(|(m, w)| w * m.alpha * m.shape(x, y)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ScalarField;

    #[test]
    fn first_mode_at_centre() {
        let coeff = ProblemCoefficients::default();
        let v = spectral_oracle(&coeff, &SpectralSource::single(1, 1), &[[0.5, 0.5]]).unwrap();
        let mu = 2.0 * PI * PI;
        let expected = (1.0 - (-mu).exp()) / mu;
        assert!((v[0] - expected).abs() < 1e-15);
        assert!((v[0] - 0.050_660_6).abs() < 1e-7);
    }

    #[test]
    fn mode_one_two() {
        let coeff = ProblemCoefficients::default();
        let m = SpectralMode::new(1, 2, &coeff).unwrap();
        let mu = 5.0 * PI * PI;
        assert!((m.alpha - (1.0 - (-mu).exp()) / mu).abs() < 1e-16);
        assert!((m.alpha - 0.020_264_2).abs() < 1e-7);
        // sin(π/2) sin(2π/4) = 1
        let v = spectral_oracle(&coeff, &SpectralSource::single(1, 2), &[[0.5, 0.25]]).unwrap();
        assert!((v[0] - m.alpha).abs() < 1e-15);
    }

    #[test]
    fn zero_weight() {
        let coeff = ProblemCoefficients::default();
        let src = SpectralSource {
            terms: vec![(2, 3, 0.0)],
        };
        let v = spectral_oracle(&coeff, &src, &[[0.1, 0.9], [0.4, 0.4]]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let mu = 3.0 * PI * PI;
        let exact = modal_alpha(mu, &TimeSignal::Constant(1.0), 1.0);
        let quad = modal_alpha(mu, &TimeSignal::function(|_| 1.0), 1.0);
        assert!((exact - quad).abs() < 1e-12);
        // g(t) = t: ∫ e^{-μ(1-s)} s ds = 1/μ - (1 - e^{-μ})/μ²
        let lin = modal_alpha(mu, &TimeSignal::function(|t| t), 1.0);
        let expected = 1.0 / mu - (1.0 - (-mu).exp()) / (mu * mu);
        assert!((lin - expected).abs() < 1e-12);
    }

    #[test]
    fn variable_coefficients_are_rejected() {
        let coeff = ProblemCoefficients {
            a: ScalarField::Constant(2.0),
            ..Default::default()
        };
        assert!(SpectralMode::new(1, 1, &coeff).is_err());
    }

    #[test]
    fn series_norm() {
        let src = SpectralSource {
            terms: vec![(1, 1, 2.0), (1, 2, 1.0), (1, 1, 1.0)],
        };
        assert!((src.l2_norm() - (10.0f64 / 4.0).sqrt()).abs() < 1e-15);
    }
}
