//! Reconstruction schemes built from node evaluations.
//!
//! Kernel-based schemes (OKA, LS) return a mixture of kernel translates;
//! spectral schemes (OKQ, QI, ELS, tELS) return coefficients on the leading
//! eigenfunctions. No system is regularized.

use std::fmt;
use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::designs::{q_weight, QWeight};
use crate::error::{Error, Result};
use crate::linalg::{least_squares_checked, solve_checked, Conditioning};
use crate::scalar::{count, to_f64, Real};
use crate::spectral::{Point, SpectralModel, TargetFunction};

/// Scheme selector. `m` is the order of the eigen-expansion where relevant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scheme {
    Oka,
    Ls,
    Okq {
        #[serde(rename = "M")]
        m: usize,
    },
    Qi,
    Els {
        #[serde(rename = "M")]
        m: usize,
        #[serde(default)]
        q: QWeight,
    },
    Tels {
        #[serde(rename = "M")]
        m: usize,
    },
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Oka => "oka",
            Scheme::Ls => "ls",
            Scheme::Okq { .. } => "okq",
            Scheme::Qi => "qi",
            Scheme::Els { .. } => "els",
            Scheme::Tels { .. } => "tels",
        }
    }

    /// Order of the expansion, or `None` when it follows `N`.
    pub fn order(&self) -> Option<usize> {
        match self {
            Scheme::Okq { m } | Scheme::Els { m, .. } | Scheme::Tels { m } => Some(*m),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order() {
            Some(m) => write!(f, "{}(M={m})", self.label()),
            None => f.write_str(self.label()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation<T> {
    /// `Σ_i w_i k(x_i, ·)`.
    KernelMix { nodes: Vec<Point<T>>, weights: DVector<T> },
    /// `Σ_{m < len} c_m e_m`.
    EigenExpansion { coeffs: Vec<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Approximant<T> {
    pub scheme: Scheme,
    pub representation: Representation<T>,
    pub conditioning: Conditioning<T>,
    /// False for OKQ coefficients beyond the node count, where the
    /// quadrature is no longer interpolative.
    pub interpolative: bool,
}

impl<T: Real> Approximant<T> {
    pub fn weights(&self) -> Option<&DVector<T>> {
        match &self.representation {
            Representation::KernelMix { weights, .. } => Some(weights),
            Representation::EigenExpansion { .. } => None,
        }
    }

    pub fn coefficients(&self) -> Option<&[T]> {
        match &self.representation {
            Representation::EigenExpansion { coeffs } => Some(coeffs),
            Representation::KernelMix { .. } => None,
        }
    }

    /// Writes `scheme,kind,index,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Output(e.to_string());
        w.write_record(["scheme", "kind", "index", "value"]).map_err(io)?;
        let scheme = self.scheme.to_string();
        let (kind, values): (&str, Vec<T>) = match &self.representation {
            Representation::KernelMix { weights, .. } => ("weight", weights.iter().copied().collect()),
            Representation::EigenExpansion { coeffs } => ("coeff", coeffs.clone()),
        };
        for (i, v) in values.iter().enumerate() {
            w.write_record([scheme.as_str(), kind, &(i + 1).to_string(), &format!("{:.17e}", to_f64(*v))])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Output(e.to_string()))
    }
}

fn check_len<T>(nodes: &[Point<T>], values: &[T]) -> Result<()> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: values.len(),
        });
    }
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("design has no nodes".into()));
    }
    Ok(())
}

fn check_order<T: Real>(model: &SpectralModel<T>, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("expansion order M must be >= 1".into()));
    }
    if m > model.m_spec() {
        return Err(Error::IndexOutOfRange {
            index: m - 1,
            m_spec: model.m_spec(),
        });
    }
    Ok(())
}

/// Optimal kernel approximation: `ŵ = K₁(x)⁻¹ f(x)`.
pub fn oka<T: Real>(model: &SpectralModel<T>, nodes: &[Point<T>], f_evals: &[T]) -> Result<Approximant<T>> {
    check_len(nodes, f_evals)?;
    let k = model.gram(nodes, 1)?;
    let (w, conditioning) = solve_checked(&k, &DVector::from_column_slice(f_evals))?;
    Ok(Approximant {
        scheme: Scheme::Oka,
        representation: Representation::KernelMix {
            nodes: nodes.to_vec(),
            weights: w,
        },
        conditioning,
        interpolative: true,
    })
}

/// `L²(ω)` projection onto the kernel translates: `ŵ = K₂(x)⁻¹ Σf(x)`.
pub fn ls<T: Real>(model: &SpectralModel<T>, nodes: &[Point<T>], f: &TargetFunction<T>) -> Result<Approximant<T>> {
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("design has no nodes".into()));
    }
    let k2 = model.gram(nodes, 2)?;
    let rhs = nodes
        .iter()
        .map(|x| model.smoothed_eval(f, x))
        .collect::<Result<Vec<_>>>()?;
    let (w, conditioning) = solve_checked(&k2, &DVector::from_vec(rhs))?;
    Ok(Approximant {
        scheme: Scheme::Ls,
        representation: Representation::KernelMix {
            nodes: nodes.to_vec(),
            weights: w,
        },
        conditioning,
        interpolative: true,
    })
}

/// OKQ transform: `Î_m = σ_m e_m(x)ᵀ K₁(x)⁻¹ f(x)` for `m < M`.
pub fn okq_transform<T: Real>(
    model: &SpectralModel<T>,
    nodes: &[Point<T>],
    f_evals: &[T],
    m: usize,
) -> Result<Approximant<T>> {
    check_order(model, m)?;
    let base = oka(model, nodes, f_evals)?;
    let w = base.weights().expect("kernel mixture");
    let e = model.leading_feature_matrix(nodes, m)?;
    let proj = e.transpose() * w;
    let coeffs = proj
        .iter()
        .zip(model.eigenvalues())
        .map(|(v, s)| *v * *s)
        .collect();
    Ok(Approximant {
        scheme: Scheme::Okq { m },
        representation: Representation::EigenExpansion { coeffs },
        conditioning: base.conditioning,
        interpolative: m <= nodes.len(),
    })
}

/// Quasi-interpolant: solves `E η = f(x)` with `E_{i,m} = e_m(x_i)`, `m < N`.
pub fn qi_transform<T: Real>(model: &SpectralModel<T>, nodes: &[Point<T>], f_evals: &[T]) -> Result<Approximant<T>> {
    check_len(nodes, f_evals)?;
    check_order(model, nodes.len())?;
    let e = model.leading_feature_matrix(nodes, nodes.len())?;
    let (eta, conditioning) = solve_checked(&e, &DVector::from_column_slice(f_evals))?;
    Ok(Approximant {
        scheme: Scheme::Qi,
        representation: Representation::EigenExpansion {
            coeffs: eta.iter().copied().collect(),
        },
        conditioning,
        interpolative: true,
    })
}

/// Empirical least squares of order `M` with weights `q(x_i)`.
pub fn els<T: Real>(
    model: &SpectralModel<T>,
    nodes: &[Point<T>],
    f_evals: &[T],
    q_evals: &[T],
    m: usize,
) -> Result<Approximant<T>> {
    check_len(nodes, f_evals)?;
    check_len(nodes, q_evals)?;
    check_order(model, m)?;
    if m > nodes.len() {
        return Err(Error::InvalidParameter(format!(
            "ELS order M = {m} exceeds the number of nodes N = {}",
            nodes.len()
        )));
    }
    // G = (1/N) Eᵀ Q E and d = (1/N) Eᵀ Q f, solved as min ‖√Q (E η - f)‖
    let mut a = model.leading_feature_matrix(nodes, m)?;
    let mut rhs = DVector::from_column_slice(f_evals);
    for (i, q) in q_evals.iter().enumerate() {
        if !(*q > T::zero()) {
            return Err(Error::InvalidParameter("ELS weights q must be positive".into()));
        }
        let s = q.sqrt();
        a.row_mut(i).scale_mut(s);
        rhs[i] *= s;
    }
    let (eta, conditioning) = least_squares_checked(&a, &rhs, T::one() / count::<T>(nodes.len()))?;
    Ok(Approximant {
        scheme: Scheme::Els { m, q: QWeight::Unit },
        representation: Representation::EigenExpansion {
            coeffs: eta.iter().copied().collect(),
        },
        conditioning,
        interpolative: true,
    })
}

/// ELS with `q` evaluated from a weight mode over the same order `M`.
pub fn els_with_weight<T: Real>(
    model: &SpectralModel<T>,
    nodes: &[Point<T>],
    f_evals: &[T],
    q: QWeight,
    m: usize,
) -> Result<Approximant<T>> {
    let q_evals = nodes
        .iter()
        .map(|x| q_weight(q, model, m, x))
        .collect::<Result<Vec<_>>>()?;
    let mut approx = els(model, nodes, f_evals, &q_evals, m)?;
    approx.scheme = Scheme::Els { m, q };
    Ok(approx)
}

/// Truncated ELS: the first `M` quasi-interpolant coefficients.
pub fn tels<T: Real>(model: &SpectralModel<T>, nodes: &[Point<T>], f_evals: &[T], m: usize) -> Result<Approximant<T>> {
    if m == 0 || m > nodes.len() {
        return Err(Error::InvalidParameter(format!(
            "tELS order M = {m} must lie in [1, N = {}]",
            nodes.len()
        )));
    }
    let mut qi = qi_transform(model, nodes, f_evals)?;
    if let Representation::EigenExpansion { coeffs } = &mut qi.representation {
        coeffs.truncate(m);
    }
    qi.scheme = Scheme::Tels { m };
    Ok(qi)
}

/// Pointwise value of an approximant.
pub fn evaluate<T: Real>(model: &SpectralModel<T>, approx: &Approximant<T>, x: &Point<T>) -> Result<T> {
    match &approx.representation {
        Representation::KernelMix { nodes, weights } => Ok(nodes
            .iter()
            .zip(weights.iter())
            .fold(T::zero(), |acc, (xi, w)| acc + *w * model.kernel(xi, x))),
        Representation::EigenExpansion { coeffs } => {
            let e = model.eigenfunctions(x, coeffs.len())?;
            Ok(coeffs.iter().zip(&e).fold(T::zero(), |acc, (c, v)| acc + *c * *v))
        }
    }
}

/// Evaluates `f` at every node.
pub fn sample_target<T: Real>(model: &SpectralModel<T>, f: &TargetFunction<T>, nodes: &[Point<T>]) -> Result<Vec<T>> {
    f.eval_many(model, nodes)
}
