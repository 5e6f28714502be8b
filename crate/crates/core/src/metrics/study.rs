use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean_stderr;
use super::{clip_squared, l2_residual, ErrorRecord};
use crate::approximants::{els_with_weight, ls, oka, okq_transform, qi_transform, tels, Approximant, Scheme};
use crate::designs::{
    sample_cvs_with, ChristoffelSampler, Design, DesignTag, DppSampler, EigenFeatures, LegendreFeatures, QWeight,
    SubsetSampler,
};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, KahanSum, Real};
use crate::spectral::{Domain, SpectralModel, TargetFunction};

/// A study fails when more than this fraction of replicates fails at some `N`.
pub const FAILURE_BUDGET: f64 = 0.2;

fn default_oversampling() -> f64 {
    2.0
}

/// Node distribution used by a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DesignFamily {
    /// Projection DPP on the first `N` eigenfunctions.
    Dpp,
    /// Projection DPP on the first `N` normalized Legendre polynomials.
    DppLegendre,
    /// I.i.d. Christoffel sampling of order `M`; when `M` is omitted it is
    /// `max(1, floor(N / oversampling))`.
    Christoffel {
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        #[serde(default = "default_oversampling")]
        oversampling: f64,
        #[serde(default)]
        q: QWeight,
    },
    /// Continuous volume sampling.
    Cvs,
}

impl DesignFamily {
    pub fn label(&self) -> &'static str {
        match self {
            DesignFamily::Dpp => "dpp",
            DesignFamily::DppLegendre => "dpp-legendre",
            DesignFamily::Christoffel { .. } => "christoffel",
            DesignFamily::Cvs => "cvs",
        }
    }

    /// Christoffel order used at budget `n`.
    pub fn christoffel_order(&self, n: usize) -> Option<usize> {
        match self {
            DesignFamily::Christoffel { m, oversampling, .. } => {
                Some(m.unwrap_or_else(|| ((n as f64 / oversampling).floor() as usize).max(1)))
            }
            _ => None,
        }
    }
}

/// Target function description. Eigen-indices are 1-based here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `e_m`, or `e_m^F = √σ_m e_m` when `rkhs` is set.
    Eigenfunction {
        m: usize,
        #[serde(default)]
        rkhs: bool,
    },
    /// `Σ_{m <= M} ξ_m e_m^F` with a fresh Gaussian draw per replicate.
    RandomGaussian {
        #[serde(rename = "M")]
        order: usize,
        seed: u64,
    },
    /// Explicit coefficients `⟨f, e_1⟩, ⟨f, e_2⟩, …`.
    Coefficients { values: Vec<f64> },
}

impl TargetSpec {
    pub fn id(&self) -> String {
        match self {
            TargetSpec::Eigenfunction { m, rkhs: true } => format!("e{m}F"),
            TargetSpec::Eigenfunction { m, rkhs: false } => format!("e{m}"),
            TargetSpec::RandomGaussian { order, seed } => format!("gauss-M{order}-seed{seed}"),
            TargetSpec::Coefficients { values } => format!("coeffs{}", values.len()),
        }
    }

    /// One past the largest 0-based index the target can touch.
    pub fn support_len(&self) -> usize {
        match self {
            TargetSpec::Eigenfunction { m, .. } => *m,
            TargetSpec::RandomGaussian { order, .. } => *order,
            TargetSpec::Coefficients { values } => values.len(),
        }
    }

    pub fn needs_fresh_draw(&self) -> bool {
        matches!(self, TargetSpec::RandomGaussian { .. })
    }

    pub fn resolve<T: Real>(&self, model: &SpectralModel<T>, replicate: usize) -> Result<TargetFunction<T>> {
        let f = match self {
            TargetSpec::Eigenfunction { m, rkhs } => {
                if *m == 0 {
                    return Err(Error::InvalidParameter("target eigen-index is 1-based".into()));
                }
                if *rkhs {
                    TargetFunction::rkhs_eigenfunction(model, m - 1)?
                } else {
                    TargetFunction::eigenfunction(m - 1)
                }
            }
            TargetSpec::RandomGaussian { order, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(*seed, 0, replicate));
                TargetFunction::random_gaussian(model, *order, &mut rng)?
            }
            TargetSpec::Coefficients { values } => {
                TargetFunction::from_dense(&values.iter().map(|v| lit::<T>(*v)).collect::<Vec<_>>())
            }
        };
        f.check_support(model)?;
        Ok(f)
    }
}

/// Per-replicate seed: the first output of the ChaCha stream `(n, replicate)`
/// keyed by `master`. Seeding `ChaCha8Rng::seed_from_u64` with it reproduces
/// the replicate on its own.
pub fn derive_seed(master: u64, n: usize, replicate: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((n as u64) << 32) | replicate as u64);
    rng.next_u64()
}

/// Everything needed to run one convergence study.
#[derive(Clone, Debug)]
pub struct StudySpec<'a, T> {
    pub model: &'a SpectralModel<T>,
    pub kernel_id: String,
    pub design: DesignFamily,
    pub scheme: Scheme,
    pub target: TargetSpec,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureRecord {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub error: Error,
}

#[derive(Clone, Debug, Default)]
pub struct StudyOutcome {
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<FailureRecord>,
    /// Design descriptions per `(N, replicate)` for successful replicates.
    pub designs: Vec<(usize, usize, String)>,
    replicates: usize,
    n_grid: Vec<usize>,
}

impl StudyOutcome {
    pub fn failures_at(&self, n: usize) -> usize {
        self.failures.iter().filter(|f| f.n == n).count()
    }

    /// Errors when more than [`FAILURE_BUDGET`] of the replicates failed at some `N`.
    pub fn check_budget(&self) -> Result<()> {
        for &n in &self.n_grid {
            let failed = self.failures_at(n);
            if failed as f64 > FAILURE_BUDGET * self.replicates as f64 {
                return Err(Error::StudyFailureBudget {
                    n,
                    failed,
                    total: self.replicates,
                });
            }
        }
        Ok(())
    }
}

enum Prepared<'a, T> {
    Dpp(DppSampler<EigenFeatures<'a, T>, T>),
    Legendre(DppSampler<LegendreFeatures<T>, T>),
    Christoffel(ChristoffelSampler<'a, T>),
    Cvs(SubsetSampler<T>),
}

fn prepare<'a, T: Real>(model: &'a SpectralModel<T>, family: &DesignFamily, n: usize) -> Result<Prepared<'a, T>> {
    Ok(match family {
        DesignFamily::Dpp => Prepared::Dpp(DppSampler::new(EigenFeatures::leading(model, n)?)),
        DesignFamily::DppLegendre => match model.domain() {
            Domain::Interval { lo, hi } => Prepared::Legendre(DppSampler::new(LegendreFeatures::new(*hi - *lo, n))),
            Domain::Sphere => {
                return Err(Error::InvalidParameter("Legendre designs need an interval domain".into()));
            }
        },
        DesignFamily::Christoffel { q, .. } => {
            let m = family.christoffel_order(n).expect("christoffel family");
            Prepared::Christoffel(ChristoffelSampler::new(model, m, *q)?)
        }
        DesignFamily::Cvs => Prepared::Cvs(SubsetSampler::new(&model.eigenvalues()[..model.usable_len()], n)?),
    })
}

fn draw<T: Real>(model: &SpectralModel<T>, prepared: &Prepared<'_, T>, n: usize, rng: &mut ChaCha8Rng) -> Result<Design<T>> {
    match prepared {
        Prepared::Dpp(s) => {
            let (nodes, attempts) = s.sample(rng)?;
            Ok(Design {
                nodes,
                tag: DesignTag::ProjectionDpp {
                    indices: s.features().indices().to_vec(),
                },
                seed: None,
                attempts,
            })
        }
        Prepared::Legendre(s) => {
            let (nodes, attempts) = s.sample(rng)?;
            Ok(Design {
                nodes,
                tag: DesignTag::LegendreDpp { n },
                seed: None,
                attempts,
            })
        }
        Prepared::Christoffel(s) => s.sample(n, rng),
        Prepared::Cvs(s) => sample_cvs_with(model, s, rng),
    }
}

/// Draws one design exactly as replicate `replicate` of a study would.
pub fn replicate_design<T: Real>(
    model: &SpectralModel<T>,
    family: &DesignFamily,
    n: usize,
    seed: u64,
) -> Result<Design<T>> {
    let prepared = prepare(model, family, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw(model, &prepared, n, &mut rng)?.with_seed(seed))
}

fn approximate<T: Real>(
    model: &SpectralModel<T>,
    scheme: Scheme,
    design: &Design<T>,
    f: &TargetFunction<T>,
    f_evals: &[T],
) -> Result<Approximant<T>> {
    let nodes = &design.nodes;
    match scheme {
        Scheme::Oka => oka(model, nodes, f_evals),
        Scheme::Ls => ls(model, nodes, f),
        Scheme::Okq { m } => okq_transform(model, nodes, f_evals, m),
        Scheme::Qi => qi_transform(model, nodes, f_evals),
        Scheme::Els { m, q } => els_with_weight(model, nodes, f_evals, q, m),
        Scheme::Tels { m } => tels(model, nodes, f_evals, m),
    }
}

struct ReplicateResult {
    metrics: Vec<(&'static str, f64, bool)>,
    design: String,
}

fn run_replicate<T: Real>(
    spec: &StudySpec<'_, T>,
    prepared: &Prepared<'_, T>,
    fixed_target: Option<&TargetFunction<T>>,
    n: usize,
    replicate: usize,
    seed: u64,
) -> Result<ReplicateResult> {
    let model = spec.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owned;
    let f = match fixed_target {
        Some(f) => f,
        None => {
            owned = spec.target.resolve(model, replicate)?;
            &owned
        }
    };
    let design = draw(model, prepared, n, &mut rng)?;
    let f_evals = f.eval_many(model, &design.nodes)?;
    let approx = approximate(model, spec.scheme, &design, f, &f_evals)?;
    let mut metrics = Vec::with_capacity(2);
    let (l2, clipped) = clip_squared("l2_sq", to_f64(l2_residual(model, f, &approx)?))?;
    metrics.push(("l2_sq", l2, clipped));
    if let (Scheme::Oka, Some(w)) = (spec.scheme, approx.weights()) {
        let fx = nalgebra::DVector::from_column_slice(&f_evals);
        let rkhs = to_f64(f.rkhs_norm_sq(model)? - fx.dot(w));
        let (v, c) = clip_squared("rkhs_sq", rkhs)?;
        metrics.push(("rkhs_sq", v, c));
    }
    Ok(ReplicateResult {
        metrics,
        design: design.tag.describe(),
    })
}

/// Runs every `(N, replicate)` pair in parallel with derived seeds.
///
/// Replicate failures are collected, not propagated; use
/// [`StudyOutcome::check_budget`] to apply the failure policy.
pub fn mc_error_study<T: Real>(spec: &StudySpec<'_, T>) -> Result<StudyOutcome> {
    if spec.n_grid.is_empty() {
        return Err(Error::InvalidParameter("N_grid is empty".into()));
    }
    if spec.replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be >= 1".into()));
    }
    if matches!(spec.scheme, Scheme::Ls) && !spec.model.has_closed_form() && spec.model.m_spec() < spec.target.support_len() {
        return Err(Error::InvalidParameter("target support exceeds the spectrum".into()));
    }
    let fixed = if spec.target.needs_fresh_draw() {
        None
    } else {
        Some(spec.target.resolve(spec.model, 0)?)
    };

    let mut outcome = StudyOutcome {
        replicates: spec.replicates,
        n_grid: spec.n_grid.clone(),
        ..Default::default()
    };
    let design_label = spec.design.label().to_string();
    let scheme_label = spec.scheme.label().to_string();
    let target_id = spec.target.id();

    for &n in &spec.n_grid {
        let prepared = prepare(spec.model, &spec.design, n);
        let results: Vec<(usize, u64, Result<ReplicateResult>)> = (0..spec.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(spec.master_seed, n, r);
                let res = match &prepared {
                    Ok(p) => run_replicate(spec, p, fixed.as_ref(), n, r, seed),
                    Err(e) => Err(e.clone()),
                };
                (r, seed, res)
            })
            .collect();
        let m_col = spec.scheme.order().or_else(|| spec.design.christoffel_order(n));
        for (r, seed, res) in results {
            match res {
                Ok(rep) => {
                    for (metric, value, clipped) in rep.metrics {
                        outcome.records.push(ErrorRecord {
                            kernel: spec.kernel_id.clone(),
                            design: design_label.clone(),
                            scheme: scheme_label.clone(),
                            target: target_id.clone(),
                            n,
                            m: m_col,
                            replicate: r,
                            metric: metric.to_string(),
                            value,
                            seed,
                            clipped,
                        });
                    }
                    outcome.designs.push((n, r, rep.design));
                }
                Err(error) => outcome.failures.push(FailureRecord {
                    n,
                    replicate: r,
                    seed,
                    error,
                }),
            }
        }
    }
    Ok(outcome)
}

/// Mean and standard error of one metric at one `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Groups records of `metric` by `N`.
pub fn summarize(records: &[ErrorRecord], metric: &str) -> Vec<Summary> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric) {
        groups.entry(r.n).or_default().push(r.value);
    }
    groups
        .into_iter()
        .map(|(n, vals)| {
            let (mean, stderr) = mean_stderr(&vals);
            Summary {
                n,
                mean,
                stderr,
                count: vals.len(),
            }
        })
        .collect()
}

/// Least-squares slope of `log(mean)` against `log N` over `range`.
pub fn fit_loglog_slope(summaries: &[Summary], range: RangeInclusive<usize>) -> Result<f64> {
    let pts: Vec<&Summary> = summaries.iter().filter(|s| range.contains(&s.n)).collect();
    if pts.len() < 3 {
        return Err(Error::SlopeFit(format!("need at least 3 grid points, got {}", pts.len())));
    }
    if let Some(bad) = pts.iter().find(|s| !(s.mean > 0.0)) {
        return Err(Error::SlopeFit(format!("non-positive mean {:e} at N = {}", bad.mean, bad.n)));
    }
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|s| (s.n as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|s| s.mean.ln()).collect();
    let mx = xs.iter().copied().collect::<KahanSum<f64>>().total() / k;
    let my = ys.iter().copied().collect::<KahanSum<f64>>().total() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::SlopeFit("all grid points share the same N".into()));
    }
    Ok(sxy / sxx)
}
