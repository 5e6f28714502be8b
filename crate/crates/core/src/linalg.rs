//! Dense solves with an explicit conditioning gate.
//!
//! No system is ever regularized: an ill-conditioned Gram matrix is reported
//! as [`Error::IllConditioned`] together with its condition estimate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Systems whose 2-norm condition number exceeds this value are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Singular-value diagnostics of a solved system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conditioning<T> {
    pub min_singular_value: T,
    pub max_singular_value: T,
}

impl<T: Real> Conditioning<T> {
    pub fn of(matrix: &DMatrix<T>) -> Self {
        if matrix.is_empty() {
            return Self {
                min_singular_value: T::zero(),
                max_singular_value: T::zero(),
            };
        }
        let sv = matrix.clone().singular_values();
        let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let min = sv.iter().copied().fold(max, |a, b| a.min(b));
        Self {
            min_singular_value: min,
            max_singular_value: max,
        }
    }

    pub fn condition_number(&self) -> f64 {
        let min = to_f64(self.min_singular_value);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            to_f64(self.max_singular_value) / min
        }
    }

    fn check(&self) -> Result<()> {
        let condition = self.condition_number();
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned {
                condition,
                min_singular_value: to_f64(self.min_singular_value),
            });
        }
        Ok(())
    }
}

/// Solves `a x = b` by partially pivoted LU after checking the condition number.
pub fn solve_checked<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<(DVector<T>, Conditioning<T>)> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let conditioning = Conditioning::of(a);
    conditioning.check()?;
    let x = a.clone().lu().solve(b).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        min_singular_value: 0.0,
    })?;
    Ok((x, conditioning))
}

/// Same as [`solve_checked`] for several right-hand sides (columns of `b`).
pub fn solve_checked_many<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<(DMatrix<T>, Conditioning<T>)> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let conditioning = Conditioning::of(a);
    conditioning.check()?;
    let x = a.clone().lu().solve(b).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        min_singular_value: 0.0,
    })?;
    Ok((x, conditioning))
}

/// Least-squares solution of `a x ≈ b` (`a` tall) through the SVD of `a`.
///
/// The conditioning gate and the returned diagnostics refer to the normal
/// matrix `scale · aᵀa`, whose singular values are `scale · s_i²`.
pub fn least_squares_checked<T: Real>(a: &DMatrix<T>, b: &DVector<T>, scale: T) -> Result<(DVector<T>, Conditioning<T>)> {
    if a.nrows() < a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().copied().fold(T::zero(), |x, y| x.max(y));
    let min = svd.singular_values.iter().copied().fold(max, |x, y| x.min(y));
    let conditioning = Conditioning {
        min_singular_value: min * min * scale,
        max_singular_value: max * max * scale,
    };
    conditioning.check()?;
    let x = svd.solve(b, T::zero()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((x, conditioning))
}

/// `||G - I||_op` for a symmetric matrix `G`.
pub fn deviation_from_identity<T: Real>(g: &DMatrix<T>) -> T {
    let n = g.nrows();
    let shifted = g - DMatrix::<T>::identity(n, n);
    let sym = (&shifted + shifted.transpose()) * lit::<T>(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Quadratic form `x^T A x`.
pub fn quadratic_form<T: Real>(a: &DMatrix<T>, x: &DVector<T>) -> T {
    x.dot(&(a * x))
}
