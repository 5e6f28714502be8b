//! I.i.d. sampling from the inverse Christoffel density, conditioned on the
//! weighted empirical Gram matrix being close to the identity.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{EigenFeatures, Envelope, FeatureMap};
use super::{dpp::PROPOSAL_CAP, Attempts, Design, DesignTag};
use crate::error::{Error, Result};
use crate::linalg::deviation_from_identity;
use crate::scalar::{count, lit, to_f64, Real};
use crate::spectral::{Point, SpectralModel};

pub const MAX_RESAMPLES: usize = 1000;
/// The conditioning event is `‖G_{q,x} - I_M‖_op <= GRAM_DEVIATION`.
pub const GRAM_DEVIATION: f64 = 0.5;

/// Weight function `q` in the empirical seminorm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QWeight {
    /// `q = M / c_M`.
    #[default]
    InverseChristoffel,
    /// `q = 1`.
    Unit,
}

/// `c_M(x) / M = (1/M) Σ_{m < M} e_m(x)²`.
pub fn christoffel_density<T: Real>(model: &SpectralModel<T>, m: usize, x: &Point<T>) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidParameter("Christoffel order M must be >= 1".into()));
    }
    let e = model.eigenfunctions(x, m)?;
    Ok(e.iter().fold(T::zero(), |a, v| a + *v * *v) / count::<T>(m))
}

/// `q(x)` for a given mode and order `M`.
pub fn q_weight<T: Real>(mode: QWeight, model: &SpectralModel<T>, m: usize, x: &Point<T>) -> Result<T> {
    match mode {
        QWeight::InverseChristoffel => Ok(T::one() / christoffel_density(model, m, x)?),
        QWeight::Unit => Ok(T::one()),
    }
}

/// `G_{q,x} = (1/N) Σ_i q(x_i) e(x_i) e(x_i)ᵀ` over the first `m` eigenfunctions.
pub fn weighted_gram<T: Real>(model: &SpectralModel<T>, nodes: &[Point<T>], m: usize, mode: QWeight) -> Result<DMatrix<T>> {
    let mut g = DMatrix::<T>::zeros(m, m);
    let mut e = vec![T::zero(); m];
    for x in nodes {
        model.fill_eigenfunctions(x, &mut e)?;
        let q = match mode {
            QWeight::InverseChristoffel => count::<T>(m) / e.iter().fold(T::zero(), |a, v| a + *v * *v),
            QWeight::Unit => T::one(),
        };
        for a in 0..m {
            for b in 0..m {
                g[(a, b)] += q * e[a] * e[b];
            }
        }
    }
    Ok(g / count::<T>(nodes.len()))
}

/// Sampler with a cached envelope for a fixed `(model, M)`.
pub struct ChristoffelSampler<'a, T> {
    features: EigenFeatures<'a, T>,
    envelope: Envelope<T>,
    q_mode: QWeight,
    max_resamples: usize,
}

impl<'a, T: Real> ChristoffelSampler<'a, T> {
    pub fn new(model: &'a SpectralModel<T>, m: usize, q_mode: QWeight) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("Christoffel order M must be >= 1".into()));
        }
        let features = EigenFeatures::leading(model, m)?;
        let envelope = Envelope::estimate(&features);
        Ok(Self {
            features,
            envelope,
            q_mode,
            max_resamples: MAX_RESAMPLES,
        })
    }

    pub fn with_max_resamples(mut self, max_resamples: usize) -> Self {
        self.max_resamples = max_resamples;
        self
    }

    pub fn envelope(&self) -> Envelope<T> {
        self.envelope
    }

    fn draw_iid<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, attempts: &mut Attempts) -> Result<Vec<Point<T>>> {
        let m = count::<T>(self.features.dim());
        let mut phi = vec![T::zero(); self.features.dim()];
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let mut proposals = 0u64;
            loop {
                if proposals >= PROPOSAL_CAP {
                    return Err(Error::RejectionCapExceeded { node: i, cap: PROPOSAL_CAP });
                }
                proposals += 1;
                attempts.proposals += 1;
                let x = self.features.domain().sample(rng);
                self.features.fill(&x, &mut phi);
                let density = phi.iter().fold(T::zero(), |a, v| a + *v * *v) / m;
                let ratio = self.envelope.ratio(density)?;
                if lit::<T>(rng.random::<f64>()) < ratio {
                    nodes.push(x);
                    break;
                }
                attempts.density_rejections += 1;
            }
        }
        Ok(nodes)
    }

    /// Draws `n` nodes, resampling the whole configuration until the
    /// conditioning event holds.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Design<T>> {
        let m = self.features.dim();
        let model = self.features.model();
        let mut attempts = Attempts::default();
        let mut last = f64::INFINITY;
        for round in 0..=self.max_resamples {
            attempts.resamples = round;
            let nodes = self.draw_iid(n, rng, &mut attempts)?;
            let g = weighted_gram(model, &nodes, m, self.q_mode)?;
            last = to_f64(deviation_from_identity(&g));
            if last <= GRAM_DEVIATION {
                return Ok(Design {
                    nodes,
                    tag: DesignTag::Christoffel { m, q: self.q_mode },
                    seed: None,
                    attempts,
                });
            }
        }
        Err(Error::ResampleBudgetExceeded {
            resamples: self.max_resamples,
            last_deviation: last,
        })
    }
}

/// Convenience wrapper building a [`ChristoffelSampler`] for one draw.
pub fn sample_christoffel_iid<T: Real, R: Rng + ?Sized>(
    model: &SpectralModel<T>,
    n: usize,
    m: usize,
    q_mode: QWeight,
    rng: &mut R,
) -> Result<Design<T>> {
    ChristoffelSampler::new(model, m, q_mode)?.sample(n, rng)
}
