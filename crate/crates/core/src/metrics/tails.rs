use crate::designs::epsilon_all;
use crate::error::{Error, Result};
use crate::scalar::{to_f64, KahanSum, Real};
use crate::spectral::SpectralModel;

/// Spectral tail quantities over a materialized spectrum plus certified
/// corrections for the eigenvalues beyond it.
///
/// `n` below is a node count: `r(n) = Σ_{m > n} σ_m` in 1-based indexing.
#[derive(Clone, Debug)]
pub struct SpectralTails {
    sigmas: Vec<f64>,
    /// `suffix[i] = Σ_{j >= i} σ_j` (0-based), length `len + 1`.
    suffix: Vec<f64>,
    suffix_sq: Vec<f64>,
    tail: f64,
    tail_sq: f64,
}

impl SpectralTails {
    /// `tail` and `tail_sq` bound `Σ σ_m` and `Σ σ_m²` beyond the slice.
    pub fn new(sigmas: Vec<f64>, tail: f64, tail_sq: f64) -> Self {
        let suffix_of = |f: &dyn Fn(f64) -> f64| {
            let mut out = vec![0.0; sigmas.len() + 1];
            let mut acc = KahanSum::<f64>::new();
            for i in (0..sigmas.len()).rev() {
                acc.add(f(sigmas[i]));
                out[i] = acc.total();
            }
            out
        };
        let suffix = suffix_of(&|s| s);
        let suffix_sq = suffix_of(&|s| s * s);
        Self {
            sigmas,
            suffix,
            suffix_sq,
            tail,
            tail_sq,
        }
    }

    /// Uses the model's usable spectrum; floored eigenvalues move into the tail.
    pub fn from_model<T: Real>(model: &SpectralModel<T>) -> Self {
        let all: Vec<f64> = model.eigenvalues().iter().map(|s| to_f64(*s)).collect();
        let (kept, dropped) = all.split_at(model.usable_len());
        let extra: f64 = dropped.iter().sum();
        let extra_sq: f64 = dropped.iter().map(|s| s * s).sum();
        Self::new(kept.to_vec(), model.tail_bound(1) + extra, model.tail_bound(2) + extra_sq)
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// `r_{n+1} = Σ_{m >= n+1} σ_m`.
    pub fn r(&self, n: usize) -> f64 {
        self.suffix[n.min(self.sigmas.len())] + self.tail
    }

    /// `Σ_{m >= n+1} σ_m²`.
    pub fn r2(&self, n: usize) -> f64 {
        self.suffix_sq[n.min(self.sigmas.len())] + self.tail_sq
    }

    /// `ε_m(n)` with 1-based `m`.
    pub fn eps(&self, m: usize, n: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidParameter("eigen-index m is 1-based".into()));
        }
        let all = epsilon_all(&self.sigmas, n)?;
        all.get(m - 1).copied().ok_or(Error::IndexOutOfRange {
            index: m - 1,
            m_spec: self.sigmas.len(),
        })
    }

    /// `β_n`; see [`beta_n`].
    pub fn beta(&self, n: usize) -> Result<f64> {
        beta_from_suffix(&self.sigmas, &self.suffix, self.tail, n)
    }
}

fn beta_from_suffix(sigmas: &[f64], suffix: &[f64], tail: f64, n: usize) -> Result<f64> {
    if n == 0 || n >= sigmas.len() {
        return Err(Error::InvalidParameter(format!(
            "beta needs 1 <= N < {} (materialized length)",
            sigmas.len()
        )));
    }
    let sigma_next = sigmas[n];
    let mut best = f64::INFINITY;
    for m in 2..=n + 1 {
        let tail_sum = suffix[m - 1] + tail;
        best = best.min(tail_sum / ((n + 2 - m) as f64 * sigma_next));
    }
    Ok(best)
}

/// `β_N = min_{M ∈ [2, N+1]} Σ_{m >= M} σ_m / ((N - M + 2) σ_{N+1})`, with
/// `tail` added to every tail sum for the eigenvalues beyond `sigmas`.
pub fn beta_n(sigmas: &[f64], tail: f64, n: usize) -> Result<f64> {
    let mut suffix = vec![0.0; sigmas.len() + 1];
    let mut acc = KahanSum::<f64>::new();
    for i in (0..sigmas.len()).rev() {
        acc.add(sigmas[i]);
        suffix[i] = acc.total();
    }
    beta_from_suffix(sigmas, &suffix, tail, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_single_term() {
        let s = [1.0, 0.5, 0.25, 0.125];
        // N = 1: only M = 2, (σ₂ + σ₃ + σ₄) / σ₂
        assert!((beta_n(&s, 0.0, 1).unwrap() - 0.875 / 0.5).abs() < 1e-15);
    }

    #[test]
    fn geometric_beta_is_bounded() {
        let s: Vec<f64> = (1..=300).map(|m| 0.5f64.powi(m)).collect();
        let tail = 0.5f64.powi(300);
        for n in 1..=100 {
            let b = beta_n(&s, tail, n).unwrap();
            assert!(b <= 4.0, "beta_{n} = {b}");
        }
    }

    #[test]
    fn tails_monotone() {
        let t = SpectralTails::new(vec![1.0, 0.5, 0.25], 0.1, 0.01);
        assert!((t.r(0) - 1.85).abs() < 1e-15);
        assert!((t.r(2) - 0.35).abs() < 1e-15);
        assert!(t.r2(1) >= t.r2(2));
    }
}
