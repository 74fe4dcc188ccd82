//! Summary statistics for replicated experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation (divisor `R − 1`).
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::arg("aggregates need at least two values"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            mean,
            std: var.sqrt(),
        })
    }

    /// Agreement with a recomputation to `tol` relative to the mean scale.
    pub fn matches(&self, other: &Self, tol: f64) -> bool {
        let scale = self.mean.abs().max(other.mean.abs()).max(f64::MIN_POSITIVE);
        (self.mean - other.mean).abs() <= tol * scale
            && (self.std - other.std).abs() <= tol * scale.max(self.std.abs())
    }
}

/// One point of a normal QQ plot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QqPair {
    pub sample: f64,
    pub normal: f64,
}

/// `(x − mean)/std`; all zeros when `std = 0`.
pub fn standardize(values: &[f64], agg: &Aggregate) -> Vec<f64> {
    values
        .iter()
        .map(|v| if agg.std > 0.0 { (v - agg.mean) / agg.std } else { 0.0 })
        .collect()
}

/// Order statistics of `standardized` against `Φ⁻¹((i − 0.5)/R)`.
pub fn qq_pairs(standardized: &[f64]) -> Vec<QqPair> {
    let normal = Normal::standard();
    let r = standardized.len() as f64;
    let mut sorted = standardized.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, sample)| QqPair {
            sample,
            normal: normal.inverse_cdf((i as f64 + 0.5) / r),
        })
        .collect()
}

/// Pearson correlation; `None` when either side is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

pub fn qq_correlation(pairs: &[QqPair]) -> Option<f64> {
    let s: Vec<f64> = pairs.iter().map(|p| p.sample).collect();
    let q: Vec<f64> = pairs.iter().map(|p| p.normal).collect();
    correlation(&s, &q)
}

/// Share of `|zᵢ| > threshold`.
pub fn tail_fraction(standardized: &[f64], threshold: f64) -> f64 {
    let beyond = standardized.iter().filter(|z| z.abs() > threshold).count();
    beyond as f64 / standardized.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 || values.is_empty() {
            return Err(Error::arg("a histogram needs values and at least one bin"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(Self { edges, counts })
    }
}

/// Least-squares slope of `y` against `x`; `None` for fewer than two
/// distinct abscissae.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_values() {
        let a = Aggregate::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(a.mean, 2.5);
        assert!((a.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let z = Aggregate::of(&[2.0, 2.0]).unwrap();
        assert_eq!(z.std, 0.0);
        assert_eq!(standardize(&[2.0, 2.0], &z), vec![0.0, 0.0]);
        assert!(Aggregate::of(&[1.0]).is_err());
    }

    #[test]
    fn qq_of_normal_quantiles_is_perfect() {
        let normal = Normal::standard();
        let z: Vec<f64> = (0..50).map(|i| normal.inverse_cdf((i as f64 + 0.5) / 50.0)).collect();
        let pairs = qq_pairs(&z);
        assert!((qq_correlation(&pairs).unwrap() - 1.0).abs() < 1e-12);
        assert!((pairs[0].normal + pairs[49].normal).abs() < 1e-12);
        assert!(pairs.windows(2).all(|w| w[0].sample <= w[1].sample));
    }

    #[test]
    fn histogram_counts_everything() {
        let v: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let h = Histogram::new(&v, 10).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 101);
        assert_eq!(h.edges.len(), 11);
        assert_eq!(h.edges[10], 1.0);
        let flat = Histogram::new(&[3.0; 4], 3).unwrap();
        assert_eq!(flat.counts, vec![4, 0, 0]);
    }

    #[test]
    fn slopes() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
        assert!(fit_slope(&[1.0], &[2.0]).is_none());
        assert!(fit_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert!(correlation(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn tails() {
        assert_eq!(tail_fraction(&[0.0, 3.5, -4.0, 1.0], 3.0), 0.5);
    }
}
