//! Exact projection-DPP sampling by the HKPV chain rule.
//!
//! Each conditional is drawn by rejection: a proposal `x ~ ω` is first
//! thinned to the marginal `‖φ(x)‖² / n`, then accepted with probability
//! `(K(x,x) - bᵀ B⁻¹ b) / K(x,x)`. The Schur complement is read off a
//! Cholesky factor of `B` that grows by one row per accepted node.

use rand::Rng;

use super::features::{Envelope, FeatureMap};
use super::Attempts;
use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};
use crate::spectral::Point;

/// Proposals allowed per node before sampling aborts.
pub const PROPOSAL_CAP: u64 = 1_000_000;
/// Conditional densities below `-NEGATIVE_TOLERANCE` are errors; smaller
/// negative values are clipped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// HKPV sampler for the projection DPP of a feature map.
pub struct DppSampler<F, T> {
    features: F,
    envelope: Envelope<T>,
    proposal_cap: u64,
}

impl<T: Real, F: FeatureMap<T>> DppSampler<F, T> {
    pub fn new(features: F) -> Self {
        let envelope = Envelope::estimate(&features);
        Self {
            features,
            envelope,
            proposal_cap: PROPOSAL_CAP,
        }
    }

    pub fn with_proposal_cap(mut self, cap: u64) -> Self {
        self.proposal_cap = cap;
        self
    }

    pub fn envelope(&self) -> Envelope<T> {
        self.envelope
    }

    pub fn features(&self) -> &F {
        &self.features
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<Point<T>>, Attempts)> {
        let n = self.features.dim();
        let nf = count::<T>(n);
        let mut attempts = Attempts::default();
        let mut nodes = Vec::with_capacity(n);
        let mut feats: Vec<Vec<T>> = Vec::with_capacity(n);
        // rows of the lower Cholesky factor of B
        let mut chol: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut phi = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];

        for i in 0..n {
            let mut proposals = 0u64;
            loop {
                if proposals >= self.proposal_cap {
                    return Err(Error::RejectionCapExceeded {
                        node: i,
                        cap: self.proposal_cap,
                    });
                }
                proposals += 1;
                attempts.proposals += 1;
                let x = self.features.domain().sample(rng);
                self.features.fill(&x, &mut phi);
                let kxx = phi.iter().fold(T::zero(), |a, v| a + *v * *v);
                let ratio = self.envelope.ratio(kxx / nf)?;
                if lit::<T>(rng.random::<f64>()) >= ratio {
                    attempts.density_rejections += 1;
                    continue;
                }
                // forward substitution L y = b with b_j = ⟨φ(x_j), φ(x)⟩
                for j in 0..i {
                    let bj = feats[j].iter().zip(&phi).fold(T::zero(), |a, (u, v)| a + *u * *v);
                    let partial = chol[j][..j].iter().zip(&y[..j]).fold(T::zero(), |a, (l, v)| a + *l * *v);
                    y[j] = (bj - partial) / chol[j][j];
                }
                let mut cond = kxx - y[..i].iter().fold(T::zero(), |a, v| a + *v * *v);
                if cond < T::zero() {
                    if to_f64(cond) < -NEGATIVE_TOLERANCE {
                        return Err(Error::NegativeConditional {
                            node: i,
                            value: to_f64(cond),
                        });
                    }
                    cond = T::zero();
                }
                if lit::<T>(rng.random::<f64>()) * kxx >= cond {
                    attempts.conditional_rejections += 1;
                    continue;
                }
                let mut row = y[..i].to_vec();
                row.push(cond.sqrt());
                chol.push(row);
                feats.push(phi.clone());
                nodes.push(x);
                break;
            }
        }
        Ok((nodes, attempts))
    }
}

/// Joint density `det(K(x_i, x_j)) / n!` of a projection DPP with respect to `ω^n`.
pub fn projection_dpp_density<T: Real, F: FeatureMap<T> + ?Sized>(features: &F, nodes: &[Point<T>]) -> T {
    let n = nodes.len();
    let mut e = nalgebra::DMatrix::zeros(n, features.dim());
    for (i, x) in nodes.iter().enumerate() {
        let phi = features.eval(x);
        for (j, v) in phi.iter().enumerate() {
            e[(i, j)] = *v;
        }
    }
    let k = &e * e.transpose();
    let mut factorial = T::one();
    for j in 2..=n {
        factorial *= count::<T>(j);
    }
    k.determinant() / factorial
}
