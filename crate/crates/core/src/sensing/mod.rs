//! Sensor layouts, the empirical norm `‖·‖_n`, noise models and measurement
//! files.

mod measurements;
mod noise;
mod sensors;

pub use measurements::{generate_measurements, MeasurementSet, TruthSource};
pub use noise::{derive_seed, NoiseKind, NoiseModel};
pub use sensors::{SensorSet, DEFAULT_QUASI_UNIFORMITY};

use crate::error::{Error, Result};

/// `(u, v)_n = (1/n) Σ u_i v_i`
pub fn empirical_inner(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::arg(format!(
            "empirical inner product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::arg("empirical inner product needs at least one sample"));
    }
    Ok(crate::linalg::dot(u, v) / u.len() as f64)
}

/// `‖u‖_n = sqrt((u, u)_n)`
pub fn empirical_norm(u: &[f64]) -> Result<f64> {
    empirical_inner(u, u).map(f64::sqrt)
}

/// `‖u - v‖_n`
pub fn empirical_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::arg("empirical distance of vectors with different lengths"));
    }
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    empirical_norm(&d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        assert_eq!(empirical_inner(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(empirical_norm(&[3.0, 4.0]).unwrap(), 12.5f64.sqrt());
        assert_eq!(empirical_inner(&[1.0, -1.0], &[1.0, 1.0]).unwrap(), 0.0);
        for n in [1, 7, 1000] {
            assert_eq!(empirical_norm(&vec![1.0; n]).unwrap(), 1.0);
        }
    }

    #[test]
    fn length_errors() {
        assert!(empirical_inner(&[1.0], &[1.0, 2.0]).is_err());
        assert!(empirical_norm(&[]).is_err());
    }
}
