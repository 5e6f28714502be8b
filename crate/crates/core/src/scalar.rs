//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All numerical code is written against [`Real`], which is satisfied by
//! `f32` and `f64`. Transcendental functions come from nalgebra's
//! `RealField` (so dense factorizations work on the same type) and
//! conversions come from `num-traits`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// A real floating-point scalar usable by the kernels, samplers and solvers.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Kahan–Babuška compensated accumulator.
///
/// Used wherever Monte Carlo aggregates must not depend on summation order.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let neg_inf = -T::max_value().unwrap() * lit(2.0);
    if a <= neg_inf {
        return b;
    }
    if b <= neg_inf {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Negative infinity for `T`.
#[inline]
pub fn neg_infinity<T: Real>() -> T {
    lit(f64::NEG_INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.total() - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn log_add_exp_identity_and_values() {
        let ninf = neg_infinity::<f64>();
        assert_eq!(log_add_exp(ninf, 0.5), 0.5);
        assert_eq!(log_add_exp(0.5, ninf), 0.5);
        let v = log_add_exp(2.0f64.ln(), 3.0f64.ln());
        assert!((v - 5.0f64.ln()).abs() < 1e-15);
        // far below f64 range after exponentiation
        let v = log_add_exp(-1000.0f64, -1000.0);
        assert!((v - (-1000.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn works_for_f32() {
        let s: KahanSum<f32> = (0..100).map(|_| 0.1f32).collect();
        assert!((s.total() - 10.0).abs() < 1e-5);
        assert_eq!(lit::<f32>(0.25), 0.25f32);
    }
}
