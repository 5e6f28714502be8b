//! Small Monte Carlo statistics helpers.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::scalar::KahanSum;

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().copied().collect::<KahanSum<f64>>().total() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<KahanSum<f64>>().total();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Sample variance and the standard error of that estimate, from the
/// fourth central moment.
pub fn variance_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mean, _) = mean_stderr(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let (m2, se) = mean_stderr(&sq);
    (m2 * n / (n - 1.0), se * n / (n - 1.0))
}

/// Sample covariance and its standard error.
pub fn covariance_stderr(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, _) = mean_stderr(xs);
    let (my, _) = mean_stderr(ys);
    let prod: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let (c, se) = mean_stderr(&prod);
    (c * n / (n - 1.0), se * n / (n - 1.0))
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, x)| {
        let c = cdf(*x);
        d.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs())
    })
}

/// Pearson χ² statistic and its upper-tail p-value.
pub fn chi_square_p_value(observed: &[u64], expected_prob: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != expected_prob.len() || observed.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: expected_prob.len(),
            found: observed.len(),
        });
    }
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected_prob)
        .map(|(o, p)| {
            let e = p * total as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, |x| x) <= 0.0005 + 1e-12);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let (stat, p) = chi_square_p_value(&[50, 50], &[0.5, 0.5]).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }
}
