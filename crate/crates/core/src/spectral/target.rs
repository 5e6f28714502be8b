use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Point, SpectralModel};
use crate::error::{Error, Result};
use crate::scalar::{lit, KahanSum, Real};

/// A function given by finitely many coefficients `⟨f, e_m⟩_ω`.
///
/// Keys are 0-based eigen-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFunction<T> {
    coeffs: BTreeMap<usize, T>,
}

impl<T: Real> Default for TargetFunction<T> {
    fn default() -> Self {
        Self { coeffs: BTreeMap::new() }
    }
}

impl<T: Real> TargetFunction<T> {
    /// Drops exact zeros.
    pub fn from_coefficients<I: IntoIterator<Item = (usize, T)>>(coeffs: I) -> Self {
        Self {
            coeffs: coeffs.into_iter().filter(|(_, c)| *c != T::zero()).collect(),
        }
    }

    /// Dense coefficients `c[0], c[1], …`.
    pub fn from_dense(coeffs: &[T]) -> Self {
        Self::from_coefficients(coeffs.iter().copied().enumerate())
    }

    /// `e_m`.
    pub fn eigenfunction(m: usize) -> Self {
        Self::from_coefficients([(m, T::one())])
    }

    /// `e_m^F = √σ_m e_m`, unit norm in the RKHS.
    pub fn rkhs_eigenfunction(model: &SpectralModel<T>, m: usize) -> Result<Self> {
        let sigma = model.eigenvalue(m)?;
        Ok(Self::from_coefficients([(m, sigma.sqrt())]))
    }

    /// `Σ_{m < order} ξ_m e_m^F` with i.i.d. standard Gaussian `ξ_m`.
    pub fn random_gaussian<R: Rng + ?Sized>(model: &SpectralModel<T>, order: usize, rng: &mut R) -> Result<Self> {
        if order > model.m_spec() {
            return Err(Error::IndexOutOfRange {
                index: order.saturating_sub(1),
                m_spec: model.m_spec(),
            });
        }
        let coeffs = (0..order).map(|m| {
            let xi: f64 = rng.sample(StandardNormal);
            (m, lit::<T>(xi) * model.eigenvalues()[m].sqrt())
        });
        Ok(Self::from_coefficients(coeffs.collect::<Vec<_>>()))
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, T> {
        &self.coeffs
    }

    pub fn coefficient(&self, m: usize) -> T {
        self.coeffs.get(&m).copied().unwrap_or_else(T::zero)
    }

    /// One past the largest index in the support (0 when empty).
    pub fn support_len(&self) -> usize {
        self.coeffs.keys().next_back().map_or(0, |m| m + 1)
    }

    pub fn check_support(&self, model: &SpectralModel<T>) -> Result<()> {
        match self.coeffs.keys().next_back() {
            Some(&m) if m >= model.m_spec() => Err(Error::IndexOutOfRange {
                index: m,
                m_spec: model.m_spec(),
            }),
            _ => Ok(()),
        }
    }

    /// `‖f‖_ω²`.
    pub fn l2_norm_sq(&self) -> T {
        self.coeffs.values().map(|c| *c * *c).collect::<KahanSum<T>>().total()
    }

    /// `‖f‖_F² = Σ c_m² / σ_m`.
    pub fn rkhs_norm_sq(&self, model: &SpectralModel<T>) -> Result<T> {
        let mut acc = KahanSum::new();
        for (&m, &c) in &self.coeffs {
            acc.add(c * c / model.eigenvalue(m)?);
        }
        Ok(acc.total())
    }

    /// `‖f - f_M‖_ω²`, the energy at indices `>= m`.
    pub fn tail_sq(&self, m: usize) -> T {
        self.coeffs.range(m..).map(|(_, c)| *c * *c).collect::<KahanSum<T>>().total()
    }

    /// Orthogonal projection `f_M` onto the first `m` eigenfunctions.
    pub fn projection(&self, m: usize) -> Self {
        Self {
            coeffs: self.coeffs.range(..m).map(|(k, v)| (*k, *v)).collect(),
        }
    }

    pub fn eval(&self, model: &SpectralModel<T>, x: &Point<T>) -> Result<T> {
        self.check_support(model)?;
        let n = self.support_len();
        if n == 0 {
            return Ok(T::zero());
        }
        let mut e = vec![T::zero(); n];
        model.fill_eigenfunctions(x, &mut e)?;
        Ok(self.coeffs.iter().fold(T::zero(), |acc, (m, c)| acc + *c * e[*m]))
    }

    pub fn eval_many(&self, model: &SpectralModel<T>, xs: &[Point<T>]) -> Result<Vec<T>> {
        xs.iter().map(|x| self.eval(model, x)).collect()
    }
}
