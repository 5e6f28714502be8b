//! Periodic Sobolev kernels on [0, 1].
//!
//! Eigen-index layout: index 0 is the constant function; for `j >= 1`,
//! index `2j - 1` is `√2 cos(2πj·)` and index `2j` is `√2 sin(2πj·)`, both with
//! eigenvalue `j^{-2s}`.

use super::legendre::bernoulli_polynomial;
use crate::scalar::{count, lit, Real};

/// Frequency `j` carried by eigen-index `m`.
#[inline]
pub(crate) fn frequency(m: usize) -> usize {
    m.div_ceil(2)
}

pub(crate) fn eigenvalues<T: Real>(s: u32, m_spec: usize) -> Vec<T> {
    (0..m_spec)
        .map(|m| match frequency(m) {
            0 => T::one(),
            j => count::<T>(j).powi(-2 * s as i32),
        })
        .collect()
}

pub(crate) fn eval<T: Real>(x: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    out[0] = T::one();
    let sqrt2 = lit::<T>(2.0).sqrt();
    let mut m = 1;
    let mut j = 1usize;
    while m < out.len() {
        let arg = T::two_pi() * count::<T>(j) * x;
        let (s, c) = arg.sin_cos();
        out[m] = sqrt2 * c;
        if m + 1 < out.len() {
            out[m + 1] = sqrt2 * s;
        }
        m += 2;
        j += 1;
    }
}

pub(crate) fn eval_one<T: Real>(m: usize, x: T) -> T {
    let j = frequency(m);
    if j == 0 {
        return T::one();
    }
    let arg = T::two_pi() * count::<T>(j) * x;
    let sqrt2 = lit::<T>(2.0).sqrt();
    if m % 2 == 1 {
        sqrt2 * arg.cos()
    } else {
        sqrt2 * arg.sin()
    }
}

/// Closed form `k_s(x,y) = 1 + (-1)^{s-1} (2π)^{2s}/(2s)! · B_{2s}({x - y})`.
pub fn closed_form<T: Real>(s: u32, x: T, y: T) -> T {
    let d = x - y;
    let frac = d - d.floor();
    let n = 2 * s as usize;
    let mut factorial = 1.0f64;
    for k in 2..=n {
        factorial *= k as f64;
    }
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    let scale = sign * std::f64::consts::TAU.powi(n as i32) / factorial;
    T::one() + lit::<T>(scale) * bernoulli_polynomial(n, frac)
}

/// Certified bound on `Σ_{m >= m_spec} σ_m^ν` for exponent `p = 2sν`.
pub(crate) fn tail_bound(s: u32, nu: u32, m_spec: usize) -> f64 {
    let p = (2 * s * nu) as f64;
    // Materialized frequencies: pairs are complete up to `full`, and an odd
    // leftover cosine may already be present for frequency `full + 1`.
    let full = (m_spec.saturating_sub(1)) / 2;
    let mut tail = 0.0;
    let mut first_free = full + 1;
    if m_spec >= 2 && (m_spec - 1) % 2 == 1 {
        // cos of frequency full+1 materialized, sin missing
        tail += ((full + 1) as f64).powf(-p);
        first_free = full + 2;
    }
    let a = first_free as f64;
    // 2 Σ_{j >= a} j^{-p} <= 2 (a^{-p} + a^{1-p}/(p-1))
    tail += 2.0 * (a.powf(-p) + a.powf(1.0 - p) / (p - 1.0));
    tail
}
