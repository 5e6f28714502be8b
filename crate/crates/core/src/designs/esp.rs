//! Elementary symmetric polynomials in log space and the induced subset
//! distribution `P(T) ∝ ∏_{t ∈ T} σ_t`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{lit, log_add_exp, neg_infinity, to_f64, Real};

/// `table[j][m] = ln e_j(σ_0, …, σ_{m-1})` for `j <= kmax`, `m <= len`.
pub fn log_esp_table<T: Real>(log_sigmas: &[T], kmax: usize) -> Vec<Vec<T>> {
    let len = log_sigmas.len();
    let mut table = vec![vec![neg_infinity::<T>(); len + 1]; kmax + 1];
    table[0].iter_mut().for_each(|v| *v = T::zero());
    for j in 1..=kmax {
        for m in 0..len {
            let with = log_sigmas[m] + table[j - 1][m];
            table[j][m + 1] = log_add_exp(table[j][m], with);
        }
    }
    table
}

fn checked_logs<T: Real>(sigmas: &[T]) -> Result<Vec<T>> {
    sigmas
        .iter()
        .map(|s| {
            if *s > T::zero() {
                Ok(s.ln())
            } else {
                Err(Error::InvalidParameter(format!("eigenvalues must be positive, got {}", to_f64(*s))))
            }
        })
        .collect()
}

/// `ln e_k(σ)`.
pub fn log_esp<T: Real>(sigmas: &[T], k: usize) -> Result<T> {
    let logs = checked_logs(sigmas)?;
    Ok(log_esp_table(&logs, k)[k][sigmas.len()])
}

/// Sampler for `|T| = n` subsets with `P(T) = ∏_{t∈T} σ_t / e_n(σ)`.
#[derive(Clone, Debug)]
pub struct SubsetSampler<T> {
    log_sigmas: Vec<T>,
    n: usize,
    table: Vec<Vec<T>>,
}

impl<T: Real> SubsetSampler<T> {
    pub fn new(sigmas: &[T], n: usize) -> Result<Self> {
        if n > sigmas.len() {
            return Err(Error::InvalidParameter(format!(
                "subset size {n} exceeds the spectrum length {}",
                sigmas.len()
            )));
        }
        let log_sigmas = checked_logs(sigmas)?;
        let table = log_esp_table(&log_sigmas, n);
        let total = table[n][sigmas.len()];
        if !total.is_finite() {
            return Err(Error::EspUnderflow(format!("ln e_{n} is not finite")));
        }
        Ok(Self { log_sigmas, n, table })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `ln e_n(σ)`.
    pub fn log_normalizer(&self) -> T {
        self.table[self.n][self.log_sigmas.len()]
    }

    /// `e_{n-1}(σ) / e_n(σ)`.
    pub fn inclusion_scale(&self) -> T {
        if self.n == 0 {
            return T::zero();
        }
        let len = self.log_sigmas.len();
        (self.table[self.n - 1][len] - self.table[self.n][len]).exp()
    }

    /// `P(T)` for a subset of size `n`.
    pub fn probability(&self, subset: &[usize]) -> Result<T> {
        if subset.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: subset.len(),
            });
        }
        let mut log_p = -self.log_normalizer();
        for &t in subset {
            log_p += *self.log_sigmas.get(t).ok_or(Error::IndexOutOfRange {
                index: t,
                m_spec: self.log_sigmas.len(),
            })?;
        }
        Ok(log_p.exp())
    }

    /// Sequential inclusion from the last index down; returns indices ascending.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut k = self.n;
        let mut chosen = Vec::with_capacity(self.n);
        for m in (0..self.log_sigmas.len()).rev() {
            if k == 0 {
                break;
            }
            let p = if m + 1 == k {
                T::one()
            } else {
                (self.log_sigmas[m] + self.table[k - 1][m] - self.table[k][m + 1]).exp()
            };
            let u: T = lit(rng.random::<f64>());
            if u < p {
                chosen.push(m);
                k -= 1;
            }
        }
        chosen.reverse();
        chosen
    }
}

/// Draws one subset; see [`SubsetSampler`].
pub fn sample_subset_esp<T: Real, R: Rng + ?Sized>(sigmas: &[T], n: usize, rng: &mut R) -> Result<Vec<usize>> {
    Ok(SubsetSampler::new(sigmas, n)?.sample(rng))
}

/// `P(T)` under the subset distribution of size `|T|`.
pub fn subset_probability<T: Real>(sigmas: &[T], subset: &[usize]) -> Result<T> {
    SubsetSampler::new(sigmas, subset.len())?.probability(subset)
}

/// `ε_m(n) = σ_m e_n(σ \ {m}) / e_n(σ)` for every materialized `m`.
pub fn epsilon_all<T: Real>(sigmas: &[T], n: usize) -> Result<Vec<T>> {
    let len = sigmas.len();
    if n >= len {
        return Err(Error::InvalidParameter(format!(
            "epsilon needs more than {n} eigenvalues, got {len}"
        )));
    }
    let logs = checked_logs(sigmas)?;
    let prefix = log_esp_table(&logs, n);
    let mut rev = logs.clone();
    rev.reverse();
    // suffix[j][r] = ln e_j of the last r eigenvalues
    let suffix = log_esp_table(&rev, n);
    let total = prefix[n][len];
    let mut out = Vec::with_capacity(len);
    for m in 0..len {
        let after = len - m - 1;
        let mut acc = neg_infinity::<T>();
        for j in 0..=n {
            acc = log_add_exp(acc, prefix[j][m] + suffix[n - j][after]);
        }
        out.push((logs[m] + acc - total).exp());
    }
    Ok(out)
}

/// `ε_m(n)` for a single index.
pub fn epsilon_m_n<T: Real>(sigmas: &[T], m: usize, n: usize) -> Result<T> {
    let all = epsilon_all(sigmas, n)?;
    all.get(m).copied().ok_or(Error::IndexOutOfRange {
        index: m,
        m_spec: sigmas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumerated_probabilities() {
        let s = [1.0f64, 0.5, 0.25];
        let p12 = subset_probability(&s, &[0, 1]).unwrap();
        let p13 = subset_probability(&s, &[0, 2]).unwrap();
        let p23 = subset_probability(&s, &[1, 2]).unwrap();
        assert!((p12 - 0.5 / 0.875).abs() < 1e-12);
        assert!((p13 - 0.25 / 0.875).abs() < 1e-12);
        assert!((p23 - 0.125 / 0.875).abs() < 1e-12);
    }

    #[test]
    fn full_subset_is_certain() {
        let s = [0.9f64, 0.3, 0.2, 0.1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(sample_subset_esp(&s, 4, &mut rng).unwrap(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn epsilon_small_case() {
        let s = [1.0f64, 0.5, 0.25];
        let eps = epsilon_all(&s, 1).unwrap();
        assert!((eps[0] - 0.75 / 1.75).abs() < 1e-12);
        assert!(eps[0] >= eps[1] && eps[1] >= eps[2]);
    }

    #[test]
    fn survives_long_polynomial_spectra() {
        let s: Vec<f64> = (1..=2000).map(|j| (j as f64).powi(-4)).collect();
        let eps = epsilon_all(&s, 60).unwrap();
        assert!(eps.iter().all(|v| v.is_finite() && *v > 0.0));
    }
}
