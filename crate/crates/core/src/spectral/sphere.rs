//! Rotation-invariant Sobolev-type kernels on S² in the real spherical
//! harmonic basis.
//!
//! Harmonics are normalized for the uniform *probability* measure on S², so
//! the addition theorem reads `Σ_i Y_{ℓ,i}(x)² = 2ℓ + 1`. Within degree `ℓ`
//! (indices `ℓ²..(ℓ+1)²`) the order is `m = 0`, then `cos(mφ)` before
//! `sin(mφ)` for `m = 1..=ℓ`.

use super::legendre::legendre_values;
use crate::scalar::{count, lit, Real};

/// Number of linearly independent spherical harmonics of exact degree `ℓ` on
/// `S^{d-1} ⊂ ℝ^d`: `(2ℓ + d - 2) Γ(ℓ + d - 2) / (Γ(d - 1) Γ(ℓ + 1))`.
pub fn harmonic_dimension(d: u32, degree: usize) -> u64 {
    assert!(d >= 2, "sphere dimension d must be at least 2");
    if degree == 0 {
        return 1;
    }
    if d == 2 {
        return 2;
    }
    let d = d as u128;
    let l = degree as u128;
    // Γ(ℓ+d-2) / (Γ(d-2) Γ(ℓ+1)) = C(ℓ+d-3, ℓ)
    let mut binom: u128 = 1;
    for k in 1..=l {
        binom = binom * (d - 3 + k) / k;
    }
    ((2 * l + d - 2) * binom / (d - 2)) as u64
}

pub(crate) fn degree_of(m: usize) -> usize {
    let mut l = (m as f64).sqrt() as usize;
    while (l + 1) * (l + 1) <= m {
        l += 1;
    }
    while l * l > m {
        l -= 1;
    }
    l
}

pub(crate) fn eigenvalues<T: Real>(s: T, l_max: usize) -> Vec<T> {
    let mut sig = Vec::with_capacity((l_max + 1) * (l_max + 1));
    for l in 0..=l_max {
        let v = (T::one() + count::<T>(l)).powf(-lit::<T>(2.0) * s);
        sig.extend(std::iter::repeat_n(v, 2 * l + 1));
    }
    sig
}

/// Fills `out` with the first `out.len()` real spherical harmonics at `x`.
pub(crate) fn eval<T: Real>(x: [T; 3], out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let l_needed = degree_of(out.len() - 1);
    let z = x[2].max(-T::one()).min(T::one());
    let sin_theta = (T::one() - z * z).max(T::zero()).sqrt();
    let phi = x[1].atan2(x[0]);
    let sqrt2 = lit::<T>(2.0).sqrt();

    // q[m][ℓ - m]: normalized associated Legendre values Q_ℓ^m(z) with
    // E_{z ~ U[-1,1]} Q² = 1.
    let mut q: Vec<Vec<T>> = Vec::with_capacity(l_needed + 1);
    let mut diag = T::one();
    for m in 0..=l_needed {
        if m > 0 {
            let mf = count::<T>(m);
            diag = diag * ((lit::<T>(2.0) * mf + T::one()) / (lit::<T>(2.0) * mf)).sqrt() * sin_theta;
        }
        let mut col = Vec::with_capacity(l_needed + 1 - m);
        col.push(diag);
        if m < l_needed {
            let mf = count::<T>(m);
            col.push((lit::<T>(2.0) * mf + lit::<T>(3.0)).sqrt() * z * col[0]);
        }
        for l in (m + 2)..=l_needed {
            let lf = count::<T>(l);
            let mf = count::<T>(m);
            let a = ((lit::<T>(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - T::one();
            let b = ((lm1 * lm1 - mf * mf) / (lit::<T>(4.0) * lm1 * lm1 - T::one())).sqrt();
            let v = a * (z * col[l - 1 - m] - b * col[l - 2 - m]);
            col.push(v);
        }
        q.push(col);
    }
    for (idx, slot) in out.iter_mut().enumerate() {
        let l = degree_of(idx);
        let offset = idx - l * l;
        let v = if offset == 0 {
            q[0][l]
        } else {
            let m = offset.div_ceil(2);
            let base = sqrt2 * q[m][l - m];
            let angle = count::<T>(m) * phi;
            if offset % 2 == 1 {
                base * angle.cos()
            } else {
                base * angle.sin()
            }
        };
        *slot = v;
    }
}

/// `Σ_{ℓ ≤ l_max} w_ℓ (2ℓ+1) P_ℓ(⟨x, y⟩)` with `w_ℓ = σ_ℓ^ν`.
pub(crate) fn zonal_sum<T: Real>(weights: &[T], x: [T; 3], y: [T; 3]) -> T {
    let t = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).max(-T::one()).min(T::one());
    let mut p = vec![T::zero(); weights.len()];
    legendre_values(t, &mut p);
    weights
        .iter()
        .zip(&p)
        .enumerate()
        .map(|(l, (w, pl))| *w * (lit::<T>(2.0) * count::<T>(l) + T::one()) * *pl)
        .fold(T::zero(), |a, b| a + b)
}

/// Certified bound on `Σ_{ℓ > l_max} (2ℓ+1)(1+ℓ)^{-p}`; infinite when `p <= 2`.
pub(crate) fn tail_bound(p: f64, l_max: usize) -> f64 {
    if p <= 2.0 {
        return f64::INFINITY;
    }
    // (2ℓ+1)(1+ℓ)^{-p} <= 2 n^{1-p} with n = ℓ+1 >= a = l_max + 2.
    let a = (l_max + 2) as f64;
    2.0 * (a.powf(1.0 - p) + a.powf(2.0 - p) / (p - 2.0))
}
