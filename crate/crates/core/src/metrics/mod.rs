//! Error functionals, spectral tail quantities and Monte Carlo studies.

pub mod identities;
pub mod stats;
mod study;
mod tails;

use std::io::Write;

use nalgebra::DVector;

pub use study::{
    derive_seed, fit_loglog_slope, mc_error_study, replicate_design, summarize, DesignFamily, FailureRecord, StudyOutcome, StudySpec,
    Summary, TargetSpec, FAILURE_BUDGET,
};
pub use tails::{beta_n, SpectralTails};

use crate::approximants::{Approximant, Representation};
use crate::error::{Error, Result};
use crate::linalg::{quadratic_form, solve_checked};
use crate::scalar::{lit, KahanSum, Real};
use crate::spectral::{Point, SpectralModel, TargetFunction};

/// Squared norms below `-CLIP_TOLERANCE` are numerical failures.
pub const CLIP_TOLERANCE: f64 = 1e-10;

/// Exact `‖f - Σ w_i k(x_i, ·)‖_ω² = ‖f‖² - 2 wᵀ Σf(x) + wᵀ K₂(x) w`.
pub fn l2_residual_kernelmix<T: Real>(
    model: &SpectralModel<T>,
    f: &TargetFunction<T>,
    nodes: &[Point<T>],
    weights: &DVector<T>,
) -> Result<T> {
    if nodes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: weights.len(),
        });
    }
    let sf = nodes
        .iter()
        .map(|x| model.smoothed_eval(f, x))
        .collect::<Result<Vec<_>>>()?;
    let cross = weights.iter().zip(&sf).map(|(w, s)| *w * *s).collect::<KahanSum<T>>().total();
    let k2 = model.gram(nodes, 2)?;
    Ok(f.l2_norm_sq() - lit::<T>(2.0) * cross + quadratic_form(&k2, weights))
}

/// `Σ_m (⟨f, e_m⟩ - c_m)²` by Parseval.
pub fn l2_residual_eigen<T: Real>(f: &TargetFunction<T>, coeffs: &[T]) -> T {
    let mut acc = KahanSum::new();
    for (m, c) in coeffs.iter().enumerate() {
        let d = f.coefficient(m) - *c;
        acc.add(d * d);
    }
    acc.add(f.tail_sq(coeffs.len()));
    acc.total()
}

/// `‖f - f̂_OKA‖_F² = ‖f‖_F² - f(x)ᵀ K₁(x)⁻¹ f(x)`.
pub fn rkhs_residual_oka<T: Real>(
    model: &SpectralModel<T>,
    nodes: &[Point<T>],
    f_evals: &[T],
    f_rkhs_norm_sq: T,
) -> Result<T> {
    let k = model.gram(nodes, 1)?;
    let fx = DVector::from_column_slice(f_evals);
    let (w, _) = solve_checked(&k, &fx)?;
    Ok(f_rkhs_norm_sq - fx.dot(&w))
}

/// `‖f - f̂‖_ω²` for either representation.
pub fn l2_residual<T: Real>(model: &SpectralModel<T>, f: &TargetFunction<T>, approx: &Approximant<T>) -> Result<T> {
    match &approx.representation {
        Representation::KernelMix { nodes, weights } => l2_residual_kernelmix(model, f, nodes, weights),
        Representation::EigenExpansion { coeffs } => Ok(l2_residual_eigen(f, coeffs)),
    }
}

/// Applies the nonnegativity floor to a squared norm.
///
/// Returns the clipped value and whether clipping happened; values below
/// `-CLIP_TOLERANCE` are errors.
pub fn clip_squared(metric: &str, value: f64) -> Result<(f64, bool)> {
    if value < -CLIP_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "squared norm {metric} is negative beyond tolerance: {value:e}"
        )));
    }
    Ok(if value < 0.0 { (0.0, true) } else { (value, false) })
}

/// One output row.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub kernel: String,
    pub design: String,
    pub scheme: String,
    pub target: String,
    pub n: usize,
    pub m: Option<usize>,
    pub replicate: usize,
    pub metric: String,
    pub value: f64,
    pub seed: u64,
    /// Set when a slightly negative squared norm was raised to zero.
    pub clipped: bool,
}

pub const CSV_HEADER: [&str; 10] = [
    "kernel",
    "design",
    "scheme",
    "target",
    "N",
    "M",
    "replicate",
    "metric",
    "value",
    "seed",
];

/// Writes records with the [`CSV_HEADER`] columns.
pub fn write_records<W: Write>(out: W, records: &[ErrorRecord]) -> Result<()> {
    let io = |e: csv::Error| Error::Output(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.kernel.as_str(),
            r.design.as_str(),
            r.scheme.as_str(),
            r.target.as_str(),
            &r.n.to_string(),
            &r.m.map(|m| m.to_string()).unwrap_or_default(),
            &r.replicate.to_string(),
            r.metric.as_str(),
            &format!("{:.17e}", r.value),
            &r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}
