use crate::error::{Error, Result};
use crate::scalar::{count, lit, to_f64, Real};
use crate::spectral::pswf::normalized_legendre;
use crate::spectral::{Domain, Point, SpectralModel};

/// A finite family of functions `φ_1, …, φ_n`, orthonormal in `L²(ω)`.
///
/// Its projection kernel `K(x, y) = Σ_i φ_i(x) φ_i(y)` defines a projection
/// DPP; `‖φ(x)‖² / n` is the associated inverse Christoffel density.
pub trait FeatureMap<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &Domain<T>;
    fn fill(&self, x: &Point<T>, out: &mut [T]);

    fn eval(&self, x: &Point<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.fill(x, &mut out);
        out
    }
}

/// Eigenfunctions `(e_m)_{m ∈ indices}` of a model.
#[derive(Clone, Debug)]
pub struct EigenFeatures<'a, T> {
    model: &'a SpectralModel<T>,
    indices: Vec<usize>,
    prefix: bool,
}

impl<'a, T: Real> EigenFeatures<'a, T> {
    /// Rejects indices beyond the model's usable spectrum.
    pub fn new(model: &'a SpectralModel<T>, indices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&m| m >= model.usable_len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                m_spec: model.usable_len(),
            });
        }
        let prefix = indices.iter().enumerate().all(|(i, m)| i == *m);
        Ok(Self { model, indices, prefix })
    }

    /// The first `n` eigenfunctions.
    pub fn leading(model: &'a SpectralModel<T>, n: usize) -> Result<Self> {
        Self::new(model, (0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn model(&self) -> &SpectralModel<T> {
        self.model
    }
}

impl<T: Real> FeatureMap<T> for EigenFeatures<'_, T> {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn domain(&self) -> &Domain<T> {
        self.model.domain()
    }

    fn fill(&self, x: &Point<T>, out: &mut [T]) {
        let res = if self.prefix {
            self.model.fill_eigenfunctions(x, out)
        } else {
            self.model.fill_subset(x, &self.indices, out)
        };
        res.expect("indices validated at construction and point drawn from the domain");
    }
}

/// The first `n` normalized Legendre polynomials `√(2j+1) P_j(2x/T)` on
/// `[-T/2, T/2]`.
#[derive(Clone, Debug)]
pub struct LegendreFeatures<T> {
    t_len: T,
    n: usize,
    domain: Domain<T>,
}

impl<T: Real> LegendreFeatures<T> {
    pub fn new(t_len: T, n: usize) -> Self {
        let half = t_len * lit(0.5);
        Self {
            t_len,
            n,
            domain: Domain::Interval { lo: -half, hi: half },
        }
    }
}

impl<T: Real> FeatureMap<T> for LegendreFeatures<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    fn fill(&self, x: &Point<T>, out: &mut [T]) {
        normalized_legendre(self.t_len, x.line(), out);
    }
}

/// Inflation applied to grid estimates of density suprema.
pub const ENVELOPE_INFLATION: f64 = 1.05;
const FLAT_TOLERANCE: f64 = 1e-12;
const VIOLATION_SLACK: f64 = 1e-9;

/// Rejection envelope for the density `‖φ(x)‖² / n` with respect to `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope<T> {
    pub bound: T,
    /// True when the density is constant on the grid; the bound is then the
    /// constant itself and proposals are never rejected.
    pub flat: bool,
}

impl<T: Real> Envelope<T> {
    pub fn estimate<F: FeatureMap<T> + ?Sized>(features: &F) -> Self {
        let n = count::<T>(features.dim());
        let mut phi = vec![T::zero(); features.dim()];
        let mut hi = T::zero();
        let mut lo = T::max_value().unwrap();
        for x in features.domain().envelope_grid() {
            features.fill(&x, &mut phi);
            let d = phi.iter().fold(T::zero(), |a, v| a + *v * *v) / n;
            hi = hi.max(d);
            lo = lo.min(d);
        }
        let flat = hi - lo <= lit::<T>(FLAT_TOLERANCE) * hi;
        let bound = if flat { hi } else { hi * lit(ENVELOPE_INFLATION) };
        Self { bound, flat }
    }

    /// Acceptance probability `density / bound`; errors when the density
    /// exceeds the bound.
    pub fn ratio(&self, density: T) -> Result<T> {
        if density > self.bound * lit(1.0 + VIOLATION_SLACK) {
            return Err(Error::EnvelopeViolation {
                density: to_f64(density),
                envelope: to_f64(self.bound),
            });
        }
        Ok((density / self.bound).min(T::one()))
    }
}
