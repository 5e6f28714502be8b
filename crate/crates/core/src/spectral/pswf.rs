//! Sinc kernel on `[-T/2, T/2]` diagonalized in a Legendre Galerkin basis.
//!
//! The basis is `φ_n(x) = √(2n+1) P_n(2x/T)`, orthonormal for the uniform
//! probability measure. Eigenfunctions are stored as coefficient columns on
//! `(φ_n)`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::legendre::{gauss_legendre, legendre_values};
use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};

/// Eigenvalues below this value are floored and excluded from designs.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;
/// Galerkin eigenvalues below `-PSD_TOLERANCE` reject the model.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub(crate) struct PswfData<T> {
    pub t_len: T,
    pub bandwidth: T,
    /// `coefficients[(n, m)]`: coefficient of `φ_n` in `e_m`.
    pub coefficients: DMatrix<T>,
    pub eigenvalues: Vec<T>,
    /// Eigenvalues as computed, before flooring.
    pub raw_eigenvalues: Vec<T>,
    pub usable: usize,
}

/// `sin(u)/u`, with a series near the origin.
pub fn sinc<T: Real>(u: T) -> T {
    if u.abs() < lit(1e-4) {
        let u2 = u * u;
        T::one() - u2 / lit(6.0) + u2 * u2 / lit(120.0)
    } else {
        u.sin() / u
    }
}

/// Fills `out[n] = √(2n+1) P_n(2x/T)`.
pub fn normalized_legendre<T: Real>(t_len: T, x: T, out: &mut [T]) {
    let u = lit::<T>(2.0) * x / t_len;
    legendre_values(u, out);
    for (n, v) in out.iter_mut().enumerate() {
        *v *= (lit::<T>(2.0) * count::<T>(n) + T::one()).sqrt();
    }
}

pub(crate) fn build<T: Real>(t_len: T, bandwidth: T, order: usize) -> Result<PswfData<T>> {
    let q = 2 * order;
    let (u, w) = gauss_legendre::<T>(q);
    let half = t_len * lit(0.5);

    // B = W Φ with probability weights w/2.
    let mut b = DMatrix::<T>::zeros(q, order);
    let mut row = vec![T::zero(); order];
    for i in 0..q {
        normalized_legendre(t_len, u[i] * half, &mut row);
        for n in 0..order {
            b[(i, n)] = row[n] * w[i] * lit(0.5);
        }
    }
    let kmat = DMatrix::<T>::from_fn(q, q, |i, j| sinc(bandwidth * half * (u[i] - u[j])));
    let a = b.transpose() * (&kmat * &b);
    let a = (&a + a.transpose()) * lit::<T>(0.5);

    let eig = SymmetricEigen::new(a);
    let mut order_idx: Vec<usize> = (0..order).collect();
    order_idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let min = eig.eigenvalues.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    if to_f64(min) < -PSD_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: to_f64(min),
        });
    }

    let floor = lit::<T>(EIGENVALUE_FLOOR);
    let mut coefficients = DMatrix::<T>::zeros(order, order);
    let mut eigenvalues = Vec::with_capacity(order);
    let mut raw_eigenvalues = Vec::with_capacity(order);
    let mut usable = 0;
    for (m, &src) in order_idx.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        raw_eigenvalues.push(lambda);
        if lambda >= floor {
            usable += 1;
        }
        eigenvalues.push(lambda.max(floor));
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().copied().fold(T::zero(), |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < T::zero() { -T::one() } else { T::one() };
        for n in 0..order {
            coefficients[(n, m)] = col[n] * sign;
        }
    }

    Ok(PswfData {
        t_len,
        bandwidth,
        coefficients,
        eigenvalues,
        raw_eigenvalues,
        usable,
    })
}

impl<T: Real> PswfData<T> {
    pub fn order(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn kernel(&self, x: T, y: T) -> T {
        sinc(self.bandwidth * (x - y))
    }

    pub fn eval(&self, x: T, out: &mut [T]) {
        let mut phi = vec![T::zero(); self.order()];
        normalized_legendre(self.t_len, x, &mut phi);
        for (m, slot) in out.iter_mut().enumerate() {
            let col = self.coefficients.column(m);
            *slot = col.iter().zip(&phi).fold(T::zero(), |acc, (c, p)| acc + *c * *p);
        }
    }

    /// Bound on `Σ_{m > order} σ_m^ν` from the trace identity `Σ σ_m = 1`.
    pub fn tail_bound(&self, nu: u32) -> f64 {
        if nu == 0 {
            return f64::INFINITY;
        }
        let captured: f64 = self.raw_eigenvalues.iter().map(|v| to_f64(*v).max(0.0)).sum();
        let trace_tail = (1.0 - captured).max(0.0);
        let sigma_max = to_f64(self.eigenvalues[0]);
        trace_tail * sigma_max.powi(nu as i32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_smooth_at_origin() {
        assert_eq!(sinc(0.0f64), 1.0);
        let u = 1e-4f64;
        assert!((sinc(u * 0.99) - (u * 0.99).sin() / (u * 0.99)).abs() < 4e-16);
        assert!((sinc(0.5f64) - 0.5f64.sin() / 0.5).abs() < 1e-16);
    }

    #[test]
    fn spectrum_shape() {
        let data = build(2.0f64, 7.0, 64).unwrap();
        let total: f64 = data.raw_eigenvalues.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(data.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
        assert!(data.usable >= 13 && data.usable <= 16, "usable = {}", data.usable);
    }
}
