//! Randomized node designs: i.i.d. Christoffel, projection DPPs and
//! continuous volume sampling.
//!
//! Every sampler takes an explicit RNG; identical inputs and RNG state give
//! bit-identical designs.

mod christoffel;
mod dpp;
mod esp;
mod features;

use std::io::Write;

use rand::Rng;

pub use christoffel::{
    christoffel_density, q_weight, sample_christoffel_iid, weighted_gram, ChristoffelSampler, QWeight, GRAM_DEVIATION,
    MAX_RESAMPLES,
};
pub use dpp::{projection_dpp_density, DppSampler, NEGATIVE_TOLERANCE, PROPOSAL_CAP};
pub use esp::{epsilon_all, epsilon_m_n, log_esp, log_esp_table, sample_subset_esp, subset_probability, SubsetSampler};
pub use features::{EigenFeatures, Envelope, FeatureMap, LegendreFeatures, ENVELOPE_INFLATION};

use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};
use crate::spectral::{Point, SpectralModel};

/// Rejection and resampling counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Attempts {
    /// Draws from the reference measure.
    pub proposals: u64,
    /// Proposals rejected by the density envelope.
    pub density_rejections: u64,
    /// Proposals rejected by an HKPV conditional.
    pub conditional_rejections: u64,
    /// Whole-configuration resamples for the Christoffel conditioning event.
    pub resamples: usize,
}

/// Which distribution a design was drawn from. Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignTag {
    Christoffel { m: usize, q: QWeight },
    ProjectionDpp { indices: Vec<usize> },
    LegendreDpp { n: usize },
    Cvs { n: usize, indices: Vec<usize>, tv_bound: f64 },
}

impl DesignTag {
    pub fn label(&self) -> &'static str {
        match self {
            DesignTag::Christoffel { .. } => "christoffel",
            DesignTag::ProjectionDpp { .. } => "dpp",
            DesignTag::LegendreDpp { .. } => "dpp-legendre",
            DesignTag::Cvs { .. } => "cvs",
        }
    }

    /// Index set of the projection kernel, when there is one.
    pub fn indices(&self) -> Option<&[usize]> {
        match self {
            DesignTag::ProjectionDpp { indices } | DesignTag::Cvs { indices, .. } => Some(indices),
            _ => None,
        }
    }

    /// Human-readable description with 1-based indices.
    pub fn describe(&self) -> String {
        let one_based = |idx: &[usize]| idx.iter().map(|m| (m + 1).to_string()).collect::<Vec<_>>().join(" ");
        match self {
            DesignTag::Christoffel { m, q } => format!("christoffel M={m} q={q:?}"),
            DesignTag::ProjectionDpp { indices } => format!("dpp T={{{}}}", one_based(indices)),
            DesignTag::LegendreDpp { n } => format!("dpp-legendre n={n}"),
            DesignTag::Cvs { n, indices, tv_bound } => {
                format!("cvs N={n} T={{{}}} tv<={tv_bound:.3e}", one_based(indices))
            }
        }
    }
}

/// An ordered node configuration with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Design<T> {
    pub nodes: Vec<Point<T>>,
    pub tag: DesignTag,
    pub seed: Option<u64>,
    pub attempts: Attempts,
}

impl<T: Real> Design<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Writes `node_index,coordinate...` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.nodes.first().map_or(1, |p| p.coordinates().len());
        let mut header = vec!["node_index".to_string()];
        if dim == 1 {
            header.push("x".into());
        } else {
            header.extend(["x", "y", "z"].iter().map(|s| s.to_string()));
        }
        w.write_record(&header).map_err(|e| Error::Output(e.to_string()))?;
        for (i, p) in self.nodes.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.coordinates().into_iter().map(|c| format!("{:.17e}", to_f64(c))));
            w.write_record(&row).map_err(|e| Error::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Output(e.to_string()))
    }
}

/// Projection DPP with kernel `Σ_{m ∈ indices} e_m(x) e_m(y)`.
pub fn sample_projection_dpp<T: Real, R: Rng + ?Sized>(
    model: &SpectralModel<T>,
    indices: &[usize],
    rng: &mut R,
) -> Result<Design<T>> {
    let sampler = DppSampler::new(EigenFeatures::new(model, indices.to_vec())?);
    let (nodes, attempts) = sampler.sample(rng)?;
    Ok(Design {
        nodes,
        tag: DesignTag::ProjectionDpp {
            indices: indices.to_vec(),
        },
        seed: None,
        attempts,
    })
}

/// Projection DPP of the first `n` normalized Legendre polynomials on `[-T/2, T/2]`.
pub fn sample_legendre_dpp<T: Real, R: Rng + ?Sized>(t_len: T, n: usize, rng: &mut R) -> Result<Design<T>> {
    let sampler = DppSampler::new(LegendreFeatures::new(t_len, n));
    let (nodes, attempts) = sampler.sample(rng)?;
    Ok(Design {
        nodes,
        tag: DesignTag::LegendreDpp { n },
        seed: None,
        attempts,
    })
}

/// Bound on the total-variation error from drawing CVS subsets out of the
/// materialized (usable) spectrum instead of the full one.
pub fn cvs_truncation_bound<T: Real>(model: &SpectralModel<T>, subsets: &SubsetSampler<T>) -> f64 {
    let ignored: f64 = model.eigenvalues()[model.usable_len()..].iter().map(|s| to_f64(*s)).sum();
    ((model.tail_bound(1) + ignored) * to_f64(subsets.inclusion_scale())).min(1.0)
}

/// Continuous volume sampling: `T ~ ∏ σ_t`, then the projection DPP on `T`.
pub fn sample_cvs<T: Real, R: Rng + ?Sized>(model: &SpectralModel<T>, n: usize, rng: &mut R) -> Result<Design<T>> {
    let subsets = SubsetSampler::new(&model.eigenvalues()[..model.usable_len()], n)?;
    sample_cvs_with(model, &subsets, rng)
}

/// As [`sample_cvs`] with a prebuilt subset sampler.
pub fn sample_cvs_with<T: Real, R: Rng + ?Sized>(
    model: &SpectralModel<T>,
    subsets: &SubsetSampler<T>,
    rng: &mut R,
) -> Result<Design<T>> {
    let indices = subsets.sample(rng);
    let mut design = sample_projection_dpp(model, &indices, rng)?;
    design.tag = DesignTag::Cvs {
        n: subsets.size(),
        indices,
        tv_bound: cvs_truncation_bound(model, subsets),
    };
    Ok(design)
}
