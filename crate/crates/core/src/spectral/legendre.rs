//! Legendre polynomials, Gauss–Legendre rules and Bernoulli polynomials.

use crate::scalar::{count, lit, Real};

/// Fills `out[n] = P_n(x)` for `n < out.len()` by the three-term recurrence.
pub fn legendre_values<T: Real>(x: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    out[0] = T::one();
    if out.len() > 1 {
        out[1] = x;
    }
    for n in 2..out.len() {
        let nf = count::<T>(n);
        out[n] = ((lit::<T>(2.0) * nf - T::one()) * x * out[n - 1] - (nf - T::one()) * out[n - 2]) / nf;
    }
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = count::<T>(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = count::<T>(n);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, refined by Newton.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x: T = lit(theta.cos());
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= T::default_epsilon() * lit(4.0) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `order` nodes.
pub fn composite_gauss_legendre<T: Real>(a: T, b: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(order);
    let h = (b - a) / count::<T>(panels);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let left = a + h * count::<T>(p);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(left + h * (*xi + T::one()) * lit(0.5));
            weights.push(*wi * h * lit(0.5));
        }
    }
    (nodes, weights)
}

/// Bernoulli numbers `B_0, …, B_n` (with `B_1 = -1/2`).
pub fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut b = vec![0.0f64; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, k)
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += binom * bk;
            binom = binom * (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
    }
    b
}

/// Bernoulli polynomial `B_n(t) = Σ_k C(n,k) B_k t^{n-k}`.
pub fn bernoulli_polynomial<T: Real>(n: usize, t: T) -> T {
    let b = bernoulli_numbers(n);
    // Horner in t over coefficients c_j of t^j, c_j = C(n, n-j) B_{n-j}.
    let mut coeffs = vec![0.0f64; n + 1];
    let mut binom = 1.0;
    for (k, bk) in b.iter().enumerate() {
        coeffs[n - k] = binom * bk;
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    coeffs.iter().rev().fold(T::zero(), |acc, c| acc * t + lit::<T>(*c))
}
