//! Monte Carlo checks of the exact moment identities under projection DPPs
//! and volume sampling, plus deterministic spectral checks.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stats::{chi_square_p_value, covariance_stderr, mean_stderr, variance_stderr};
use super::study::derive_seed;
use super::tails::SpectralTails;
use super::l2_residual_eigen;
use crate::approximants::{qi_transform, tels};
use crate::designs::{epsilon_all, sample_projection_dpp, subset_probability, SubsetSampler};
use crate::error::{Error, Result};
use crate::spectral::{SpectralModel, TargetFunction, DEFAULT_M_SPEC};

/// Number of standard errors in every acceptance band.
pub const SIGMA_BAND: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    EzUnbiased,
    EzVariance,
    EzUncorrelated,
    Kale,
    TelsIdentity,
    Iop,
    EpsBound,
    CvsMixture,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::EzUnbiased,
        Suite::EzVariance,
        Suite::EzUncorrelated,
        Suite::Kale,
        Suite::TelsIdentity,
        Suite::Iop,
        Suite::EpsBound,
        Suite::CvsMixture,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::EzUnbiased => "ez-unbiased",
            Suite::EzVariance => "ez-variance",
            Suite::EzUncorrelated => "ez-uncorrelated",
            Suite::Kale => "kale",
            Suite::TelsIdentity => "tels-identity",
            Suite::Iop => "iop",
            Suite::EpsBound => "eps-bound",
            Suite::CvsMixture => "cvs-mixture",
        }
    }

    /// Default Monte Carlo replicate count.
    pub fn default_replicates(&self) -> usize {
        match self {
            Suite::EpsBound => 0,
            Suite::CvsMixture => 100_000,
            _ => 10_000,
        }
    }

    pub fn run(&self, budget: &Budget) -> Result<Report> {
        match self {
            Suite::EzUnbiased => ez_unbiased(budget),
            Suite::EzVariance => ez_variance(budget),
            Suite::EzUncorrelated => ez_uncorrelated(budget),
            Suite::Kale => kale(budget),
            Suite::TelsIdentity => tels_identity(budget),
            Suite::Iop => iop(budget),
            Suite::EpsBound => eps_bound(),
            Suite::CvsMixture => cvs_mixture(budget),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown verification suite `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub replicates: usize,
    pub seed: u64,
}

impl Budget {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self { replicates, seed }
    }
}

/// One comparison. `band` is the allowed deviation: a symmetric half-width
/// for equalities, the slack above `expected` for upper bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub expected: f64,
    pub band: f64,
    pub pass: bool,
}

impl Check {
    pub fn equal(label: impl Into<String>, observed: f64, expected: f64, band: f64) -> Self {
        Self {
            label: label.into(),
            observed,
            expected,
            band,
            pass: (observed - expected).abs() <= band,
        }
    }

    pub fn at_most(label: impl Into<String>, observed: f64, bound: f64, band: f64) -> Self {
        Self {
            label: label.into(),
            observed,
            expected: bound,
            band,
            pass: observed <= bound + band,
        }
    }

    pub fn at_least(label: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            observed,
            expected: bound,
            band: 0.0,
            pass: observed > bound,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: observed {:.6e}, expected {:.6e}, band {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            self.observed,
            self.expected,
            self.band
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Informational lines that carry no verdict.
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}: {}", self.suite, if self.passed() { "PASS" } else { "FAIL" })?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Sobolev `s = 1` on the circle.
pub fn sobolev_model() -> Result<SpectralModel<f64>> {
    SpectralModel::periodic_sobolev(1, DEFAULT_M_SPEC)
}

/// Coefficients 1, -0.5, 0.25 on the first three eigenfunctions and 0.1 on
/// the twelfth.
pub fn reference_target() -> TargetFunction<f64> {
    TargetFunction::from_coefficients([(0, 1.0), (1, -0.5), (2, 0.25), (11, 0.1)])
}

/// Runs `per_design` on `replicates` independent draws of the projection DPP
/// on the first `n` eigenfunctions.
pub fn dpp_replicates<R, F>(model: &SpectralModel<f64>, n: usize, budget: &Budget, per_design: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&[crate::Point<f64>]) -> Result<R> + Sync,
{
    if budget.replicates < 2 {
        return Err(Error::InvalidParameter("a Monte Carlo check needs at least 2 replicates".into()));
    }
    let indices: Vec<usize> = (0..n).collect();
    (0..budget.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, n, r));
            let design = sample_projection_dpp(model, &indices, &mut rng)?;
            per_design(&design.nodes)
        })
        .collect()
}

/// QI coefficients of `f` for every replicate, as columns `m < n`.
fn qi_coefficients(model: &SpectralModel<f64>, f: &TargetFunction<f64>, n: usize, budget: &Budget) -> Result<Vec<Vec<f64>>> {
    let rows = dpp_replicates(model, n, budget, |nodes| {
        let fx = f.eval_many(model, nodes)?;
        Ok(qi_transform(model, nodes, &fx)?
            .coefficients()
            .expect("eigen expansion")
            .to_vec())
    })?;
    Ok((0..n).map(|m| rows.iter().map(|r| r[m]).collect()).collect())
}

const EZ_N: usize = 7;

fn ez_unbiased(budget: &Budget) -> Result<Report> {
    let model = sobolev_model()?;
    let f = reference_target();
    let cols = qi_coefficients(&model, &f, EZ_N, budget)?;
    let checks = cols
        .iter()
        .enumerate()
        .map(|(m, col)| {
            let (mean, se) = mean_stderr(col);
            Check::equal(format!("mean I_{}", m + 1), mean, f.coefficient(m), SIGMA_BAND * se)
        })
        .collect();
    Ok(Report {
        suite: Suite::EzUnbiased,
        checks,
        notes: vec![],
    })
}

fn ez_variance(budget: &Budget) -> Result<Report> {
    let model = sobolev_model()?;
    let f = reference_target();
    let cols = qi_coefficients(&model, &f, EZ_N, budget)?;
    let expected = f.tail_sq(EZ_N);
    let checks = cols
        .iter()
        .enumerate()
        .map(|(m, col)| {
            let (var, se) = variance_stderr(col);
            Check::equal(format!("var I_{}", m + 1), var, expected, SIGMA_BAND * se)
        })
        .collect();
    Ok(Report {
        suite: Suite::EzVariance,
        checks,
        notes: vec![],
    })
}

fn ez_uncorrelated(budget: &Budget) -> Result<Report> {
    let model = sobolev_model()?;
    let f = reference_target();
    let cols = qi_coefficients(&model, &f, EZ_N, budget)?;
    let mut checks = Vec::new();
    for a in 0..EZ_N {
        for b in a + 1..EZ_N {
            let (cov, se) = covariance_stderr(&cols[a], &cols[b]);
            checks.push(Check::equal(format!("cov(I_{}, I_{})", a + 1, b + 1), cov, 0.0, SIGMA_BAND * se));
        }
    }
    Ok(Report {
        suite: Suite::EzUncorrelated,
        checks,
        notes: vec![],
    })
}

fn kale(budget: &Budget) -> Result<Report> {
    let model = sobolev_model()?;
    let f = reference_target();
    let errs = dpp_replicates(&model, EZ_N, budget, |nodes| {
        let fx = f.eval_many(&model, nodes)?;
        let qi = qi_transform(&model, nodes, &fx)?;
        Ok(l2_residual_eigen(&f, qi.coefficients().expect("eigen expansion")))
    })?;
    let (mean, se) = mean_stderr(&errs);
    let tail = f.tail_sq(EZ_N);
    let n = EZ_N as f64;
    Ok(Report {
        suite: Suite::Kale,
        checks: vec![Check::equal("mean ||f - f_QI||^2 vs N ||f - f_N||^2", mean, n * tail, SIGMA_BAND * se)],
        notes: vec![format!(
            "(N+1) ||f - f_N||^2 = {:.6e}, deviation {:.2} stderr",
            (n + 1.0) * tail,
            (mean - (n + 1.0) * tail) / se
        )],
    })
}

/// Mean tELS error at order `m` from designs of size `n`.
fn tels_error(model: &SpectralModel<f64>, f: &TargetFunction<f64>, n: usize, m: usize, budget: &Budget) -> Result<(f64, f64)> {
    let errs = dpp_replicates(model, n, budget, |nodes| {
        let fx = f.eval_many(model, nodes)?;
        let t = tels(model, nodes, &fx, m)?;
        Ok(l2_residual_eigen(f, t.coefficients().expect("eigen expansion")))
    })?;
    Ok(mean_stderr(&errs))
}

fn tels_identity(budget: &Budget) -> Result<Report> {
    let (n, m) = (10, 4);
    let model = sobolev_model()?;
    let f = reference_target();
    let (mean, se) = tels_error(&model, &f, n, m, budget)?;
    let head = f.tail_sq(m);
    let expected = head + m as f64 * f.tail_sq(n);
    Ok(Report {
        suite: Suite::TelsIdentity,
        checks: vec![
            Check::equal("mean ||f - f_tELS||^2", mean, expected, SIGMA_BAND * se),
            Check::at_most("ratio to ||f - f_M||^2", mean / head, 1.0 + m as f64, SIGMA_BAND * se / head),
        ],
        notes: vec![],
    })
}

fn iop(budget: &Budget) -> Result<Report> {
    let n = EZ_N;
    let model = sobolev_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, 0, 0));
    let targets = [
        ("reference", reference_target()),
        ("gaussian", TargetFunction::random_gaussian(&model, 20, &mut rng)?),
    ];
    let mut checks = Vec::new();
    for (name, f) in &targets {
        for m in [n / 2, n] {
            let (mean, se) = tels_error(&model, f, n, m, budget)?;
            let head = f.tail_sq(m);
            let constant = 1.0 + m as f64;
            checks.push(Check::at_most(
                format!("{name} M={m}: ratio to ||f - f_M||^2"),
                mean / head,
                constant,
                SIGMA_BAND * se / head,
            ));
            if m == n {
                checks.push(Check::equal(
                    format!("{name} M=N: tight ratio"),
                    mean / head,
                    constant,
                    SIGMA_BAND * se / head,
                ));
            }
        }
    }
    Ok(Report {
        suite: Suite::Iop,
        checks,
        notes: vec![],
    })
}

fn eps_bound() -> Result<Report> {
    let model = sobolev_model()?;
    let tails = SpectralTails::from_model(&model);
    let sigmas = tails.sigmas();
    let mut checks = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut monotone = true;
    for n in 1..=50 {
        let eps = epsilon_all(sigmas, n)?;
        monotone &= eps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10));
        let bound = sigmas[n] * (1.0 + tails.beta(n)?);
        worst_ratio = worst_ratio.max(eps[0] / bound);
    }
    checks.push(Check::at_most("max over N <= 50 of eps_1(N) / bound", worst_ratio, 1.0, 1e-10));
    checks.push(Check::equal("eps_m(N) non-increasing in m", f64::from(monotone as u8), 1.0, 0.0));

    let small = [1.0, 0.5, 0.25];
    let eps = epsilon_all(&small, 1)?;
    checks.push(Check::equal("eps_1(1) on (1, 0.5, 0.25)", eps[0], 0.75 / 1.75, 1e-10));
    for (subset, expected) in [(vec![0usize], 1.0 / 1.75), (vec![1], 0.5 / 1.75), (vec![2], 0.25 / 1.75)] {
        checks.push(Check::equal(
            format!("P(T = {{{}}}) on (1, 0.5, 0.25)", subset[0] + 1),
            subset_probability(&small, &subset)?,
            expected,
            1e-10,
        ));
    }
    let pair_total = 0.5 + 0.25 + 0.125;
    for (a, b, prod) in [(0usize, 1usize, 0.5), (0, 2, 0.25), (1, 2, 0.125)] {
        checks.push(Check::equal(
            format!("P(T = {{{}, {}}}) on (1, 0.5, 0.25)", a + 1, b + 1),
            subset_probability(&small, &[a, b])?,
            prod / pair_total,
            1e-10,
        ));
    }
    let mut max_beta: f64 = 0.0;
    for n in 1..=200 {
        max_beta = max_beta.max(tails.beta(n)?);
    }
    checks.push(Check::at_most("max over N <= 200 of beta_N", max_beta, 10.0, 0.0));
    Ok(Report {
        suite: Suite::EpsBound,
        checks,
        notes: vec![],
    })
}

fn cvs_mixture(budget: &Budget) -> Result<Report> {
    let n = 2;
    let model = sobolev_model()?;
    let sigmas = &model.eigenvalues()[..6];
    let sampler = SubsetSampler::new(sigmas, n)?;
    let mut pairs = Vec::new();
    for a in 0..sigmas.len() {
        for b in a + 1..sigmas.len() {
            pairs.push([a, b]);
        }
    }
    let probs = pairs
        .iter()
        .map(|p| subset_probability(sigmas, p))
        .collect::<Result<Vec<_>>>()?;
    let draws: Vec<Vec<usize>> = (0..budget.replicates)
        .into_par_iter()
        .map(|r| sampler.sample(&mut ChaCha8Rng::seed_from_u64(derive_seed(budget.seed, n, r))))
        .collect();
    let mut counts = vec![0u64; pairs.len()];
    for d in &draws {
        let k = pairs
            .iter()
            .position(|p| p[..] == d[..])
            .ok_or_else(|| Error::InvalidParameter(format!("subset {d:?} outside the enumeration")))?;
        counts[k] += 1;
    }
    let (stat, p) = chi_square_p_value(&counts, &probs)?;
    Ok(Report {
        suite: Suite::CvsMixture,
        checks: vec![Check::at_least("chi-square p-value", p, 1e-3)],
        notes: vec![format!("chi-square statistic {stat:.3} on {} degrees of freedom", pairs.len() - 1)],
    })
}
