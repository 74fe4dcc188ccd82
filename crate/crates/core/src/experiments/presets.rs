use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::SpectralSource;

/// Registered true sources `f*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourcePreset {
    /// Two Gaussian bumps scaled to `‖f*‖_{L²} = 0.54`.
    P1,
    /// `sin(πx) sin(πy)`, with a closed-form forward solution.
    P2,
    /// Indicator of `[1/4, 3/4]²`.
    P3,
}

/// Target norm of [`SourcePreset::P1`].
pub const P1_NORM: f64 = 0.54;

const BUMPS: [(f64, f64, f64); 2] = [(0.3, 0.35, 1.0), (0.7, 0.65, 0.8)];
const BUMP_WIDTH: f64 = 0.1;

fn bumps(x: f64, y: f64) -> f64 {
    BUMPS
        .iter()
        .map(|(cx, cy, w)| {
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            w * (-r2 / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
        })
        .sum()
}

/// `‖bumps‖_{L²}` by tensor Gauss–Legendre on a 64 × 64 grid of cells.
fn bumps_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        const NODES: [f64; 4] = [
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ];
        const WEIGHTS: [f64; 4] = [
            0.347_854_845_137_453_9,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_9,
        ];
        let cells = 64;
        let h = 1.0 / cells as f64;
        let mut sum = 0.0;
        for i in 0..cells {
            for j in 0..cells {
                for (a, wa) in NODES.iter().zip(WEIGHTS) {
                    for (b, wb) in NODES.iter().zip(WEIGHTS) {
                        let x = (i as f64 + 0.5 * (1.0 + a)) * h;
                        let y = (j as f64 + 0.5 * (1.0 + b)) * h;
                        sum += wa * wb * bumps(x, y).powi(2);
                    }
                }
            }
        }
        (sum * h * h / 4.0).sqrt()
    })
}

impl SourcePreset {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            SourcePreset::P1 => P1_NORM / bumps_norm() * bumps(x, y),
            SourcePreset::P2 => (PI * x).sin() * (PI * y).sin(),
            SourcePreset::P3 => {
                if (0.25..=0.75).contains(&x) && (0.25..=0.75).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `‖f*‖_{L²(Ω)}`
    pub fn l2_norm(&self) -> f64 {
        match self {
            SourcePreset::P1 => P1_NORM,
            SourcePreset::P2 | SourcePreset::P3 => 0.5,
        }
    }

    /// Modal expansion, when the preset has a finite one.
    pub fn spectral(&self) -> Option<SpectralSource> {
        match self {
            SourcePreset::P2 => Some(SpectralSource::single(1, 1)),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SourcePreset::P1 => "p1",
            SourcePreset::P2 => "p2",
            SourcePreset::P3 => "p3",
        }
    }
}

impl fmt::Display for SourcePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourcePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(SourcePreset::P1),
            "p2" => Ok(SourcePreset::P2),
            "p3" => Ok(SourcePreset::P3),
            other => Err(Error::arg(format!("unknown source preset `{other}` (expected p1, p2 or p3)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::FemSpace;

    #[test]
    fn norms_match_quadrature() {
        let space = FemSpace::with_spacing(1.0 / 64.0).unwrap();
        for p in [SourcePreset::P1, SourcePreset::P2] {
            let n = space.integrate(|x, y| p.eval(x, y).powi(2)).sqrt();
            assert!((n - p.l2_norm()).abs() <= 1e-3, "{p}: {n}");
        }
    }

    #[test]
    fn parse() {
        assert_eq!("P3".parse::<SourcePreset>().unwrap(), SourcePreset::P3);
        assert!("p9".parse::<SourcePreset>().is_err());
        assert_eq!(serde_json::to_string(&SourcePreset::P1).unwrap(), "\"p1\"");
    }

    #[test]
    fn p1_is_small_on_the_boundary() {
        let peak = SourcePreset::P1.eval(0.3, 0.35);
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for (x, y) in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)] {
                assert!(SourcePreset::P1.eval(x, y) < 0.02 * peak);
            }
        }
    }
}
