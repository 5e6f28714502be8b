//! Mercer-decomposed kernels with exact eigenpairs.
//!
//! A [`SpectralModel`] holds a kernel `k(x, y) = Σ_m σ_m e_m(x) e_m(y)` with
//! `(e_m)` orthonormal in `L²(ω)` for the uniform probability measure `ω` of
//! its domain. Eigen-indices are 0-based throughout the library: index `0`
//! is the leading eigenfunction.

mod domain;
pub mod legendre;
pub mod periodic;
pub mod pswf;
pub mod sphere;
mod target;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use domain::{Domain, Point, LINE_ENVELOPE_GRID, SPHERE_ENVELOPE_GRID};
pub use target::TargetFunction;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use pswf::PswfData;

pub const DEFAULT_M_SPEC: usize = 2000;
pub const DEFAULT_L_MAX: usize = 60;
pub const DEFAULT_LEGENDRE_ORDER: usize = 128;
pub const MIN_LEGENDRE_ORDER: usize = 20;

fn default_m_spec() -> usize {
    DEFAULT_M_SPEC
}

fn default_l_max() -> usize {
    DEFAULT_L_MAX
}

fn default_legendre_order() -> usize {
    DEFAULT_LEGENDRE_ORDER
}

fn default_sphere_dim() -> u32 {
    3
}

/// Serializable description of a kernel family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    PeriodicSobolev {
        s: u32,
        #[serde(rename = "M_spec", default = "default_m_spec")]
        m_spec: usize,
    },
    SphereSobolev {
        #[serde(default = "default_sphere_dim")]
        d: u32,
        s: f64,
        #[serde(rename = "L_max", default = "default_l_max")]
        l_max: usize,
    },
    SincPswf {
        #[serde(rename = "T_len")]
        t_len: f64,
        #[serde(rename = "F")]
        bandwidth: f64,
        #[serde(default = "default_legendre_order")]
        legendre_order: usize,
    },
}

impl KernelSpec {
    pub fn build<T: Real>(&self) -> Result<SpectralModel<T>> {
        match *self {
            KernelSpec::PeriodicSobolev { s, m_spec } => SpectralModel::periodic_sobolev(s, m_spec),
            KernelSpec::SphereSobolev { d, s, l_max } => SpectralModel::sphere_sobolev(d, lit(s), l_max),
            KernelSpec::SincPswf {
                t_len,
                bandwidth,
                legendre_order,
            } => SpectralModel::sinc_pswf(lit(t_len), lit(bandwidth), legendre_order),
        }
    }

    /// Short identifier used in output rows.
    pub fn id(&self) -> String {
        match self {
            KernelSpec::PeriodicSobolev { s, .. } => format!("periodic-sobolev-s{s}"),
            KernelSpec::SphereSobolev { s, .. } => format!("sphere-sobolev-s{s}"),
            KernelSpec::SincPswf { t_len, bandwidth, .. } => format!("sinc-T{t_len}-F{bandwidth}"),
        }
    }

    /// Number of materialized eigenpairs the spec will produce.
    pub fn m_spec(&self) -> usize {
        match *self {
            KernelSpec::PeriodicSobolev { m_spec, .. } => m_spec,
            KernelSpec::SphereSobolev { l_max, .. } => (l_max + 1) * (l_max + 1),
            KernelSpec::SincPswf { legendre_order, .. } => legendre_order,
        }
    }
}

#[derive(Clone, Debug)]
enum Family<T> {
    Periodic { s: u32 },
    Sphere { s: T, l_max: usize },
    Pswf(PswfData<T>),
}

/// A kernel together with its Mercer decomposition, truncated at `M_spec`.
///
/// Immutable after construction; all evaluators are pure.
#[derive(Clone, Debug)]
pub struct SpectralModel<T> {
    family: Family<T>,
    domain: Domain<T>,
    eigenvalues: Vec<T>,
    usable: usize,
}

impl<T: Real> SpectralModel<T> {
    /// Periodic Sobolev space of order `s` on `[0, 1]`.
    pub fn periodic_sobolev(s: u32, m_spec: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter("periodic Sobolev order s must be >= 1".into()));
        }
        if m_spec == 0 {
            return Err(Error::InvalidParameter("M_spec must be >= 1".into()));
        }
        Ok(Self {
            family: Family::Periodic { s },
            domain: Domain::Interval {
                lo: T::zero(),
                hi: T::one(),
            },
            eigenvalues: periodic::eigenvalues(s, m_spec),
            usable: m_spec,
        })
    }

    /// Sobolev-type kernel on `S^{d-1}`; only `d = 3` is implemented.
    ///
    /// `s` must exceed `1/2`. For `s <= 1` the kernel is not trace class and
    /// [`tail_bound`](Self::tail_bound) reports an infinite tail.
    pub fn sphere_sobolev(d: u32, s: T, l_max: usize) -> Result<Self> {
        if d != 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        if s <= lit(0.5) {
            return Err(Error::InvalidParameter(format!(
                "sphere smoothness s must exceed 1/2, got {}",
                crate::scalar::to_f64(s)
            )));
        }
        let eigenvalues = sphere::eigenvalues(s, l_max);
        let usable = eigenvalues.len();
        Ok(Self {
            family: Family::Sphere { s, l_max },
            domain: Domain::Sphere,
            eigenvalues,
            usable,
        })
    }

    /// `Sinc(F(x - y))` on `[-T/2, T/2]`, diagonalized over `legendre_order`
    /// normalized Legendre polynomials.
    pub fn sinc_pswf(t_len: T, bandwidth: T, legendre_order: usize) -> Result<Self> {
        if t_len <= T::zero() || bandwidth <= T::zero() {
            return Err(Error::InvalidParameter("T_len and F must be positive".into()));
        }
        if legendre_order < MIN_LEGENDRE_ORDER {
            return Err(Error::InvalidParameter(format!(
                "legendre_order must be >= {MIN_LEGENDRE_ORDER}, got {legendre_order}"
            )));
        }
        let data = pswf::build(t_len, bandwidth, legendre_order)?;
        let half = t_len * lit(0.5);
        Ok(Self {
            domain: Domain::Interval { lo: -half, hi: half },
            eigenvalues: data.eigenvalues.clone(),
            usable: data.usable,
            family: Family::Pswf(data),
        })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    /// Materialized eigenvalues `σ_0 >= σ_1 >= …`, length `M_spec`.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, m: usize) -> Result<T> {
        self.eigenvalues.get(m).copied().ok_or(Error::IndexOutOfRange {
            index: m,
            m_spec: self.m_spec(),
        })
    }

    pub fn m_spec(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of leading eigenpairs that may enter designs and solves.
    ///
    /// Smaller than `M_spec` only for the Sinc kernel, whose eigenvalues
    /// below [`pswf::EIGENVALUE_FLOOR`] are floored.
    pub fn usable_len(&self) -> usize {
        self.usable
    }

    /// True when some eigenvalues were raised to the machine floor.
    pub fn floored(&self) -> bool {
        self.usable < self.m_spec()
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self.family, Family::Sphere { .. })
    }

    /// Certified bound on `Σ_{m >= M_spec} σ_m^ν`.
    pub fn tail_bound(&self, nu: u32) -> f64 {
        if nu == 0 {
            return f64::INFINITY;
        }
        match &self.family {
            Family::Periodic { s } => periodic::tail_bound(*s, nu, self.m_spec()),
            Family::Sphere { s, l_max } => {
                sphere::tail_bound(2.0 * crate::scalar::to_f64(*s) * nu as f64, *l_max)
            }
            Family::Pswf(data) => data.tail_bound(nu),
        }
    }

    /// `sup_x |e_m(x)|²` over the family (used to scale truncation errors).
    pub fn eigenfunction_sup_sq(&self) -> f64 {
        match &self.family {
            Family::Periodic { .. } => 2.0,
            Family::Sphere { l_max, .. } => (2 * l_max + 1) as f64,
            Family::Pswf(data) => (2 * data.order() - 1) as f64,
        }
    }

    pub fn sample_reference<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        self.domain.sample(rng)
    }

    /// Fills `out[m] = e_m(x)` for `m < out.len()`.
    pub fn fill_eigenfunctions(&self, x: &Point<T>, out: &mut [T]) -> Result<()> {
        if out.len() > self.m_spec() {
            return Err(Error::IndexOutOfRange {
                index: out.len() - 1,
                m_spec: self.m_spec(),
            });
        }
        match (&self.family, x) {
            (Family::Periodic { .. }, Point::Line(t)) => periodic::eval(*t, out),
            (Family::Sphere { .. }, Point::Sphere(v)) => sphere::eval(*v, out),
            (Family::Pswf(data), Point::Line(t)) => data.eval(*t, out),
            _ => return Err(Error::InvalidParameter("point does not belong to the model's domain".into())),
        }
        Ok(())
    }

    pub fn eigenfunctions(&self, x: &Point<T>, count: usize) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); count];
        self.fill_eigenfunctions(x, &mut out)?;
        Ok(out)
    }

    pub fn eigenfunction(&self, m: usize, x: &Point<T>) -> Result<T> {
        let mut out = [T::zero()];
        self.fill_subset(x, &[m], &mut out)?;
        Ok(out[0])
    }

    /// Fills `out[i] = e_{indices[i]}(x)`.
    pub fn fill_subset(&self, x: &Point<T>, indices: &[usize], out: &mut [T]) -> Result<()> {
        if let Some(&bad) = indices.iter().find(|&&m| m >= self.m_spec()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                m_spec: self.m_spec(),
            });
        }
        if let (Family::Periodic { .. }, Point::Line(t)) = (&self.family, x) {
            for (slot, &m) in out.iter_mut().zip(indices) {
                *slot = periodic::eval_one(m, *t);
            }
            return Ok(());
        }
        let top = indices.iter().copied().max().map_or(0, |m| m + 1);
        let mut all = vec![T::zero(); top];
        self.fill_eigenfunctions(x, &mut all)?;
        for (slot, &m) in out.iter_mut().zip(indices) {
            *slot = all[m];
        }
        Ok(())
    }

    /// `k(x, y)`: closed form where available, otherwise the truncated
    /// zonal expansion.
    pub fn kernel(&self, x: &Point<T>, y: &Point<T>) -> T {
        match &self.family {
            Family::Periodic { s } => periodic::closed_form(*s, x.line(), y.line()),
            Family::Sphere { s, l_max } => sphere::zonal_sum(&self.zonal_weights(*s, *l_max, 1), x.sphere(), y.sphere()),
            Family::Pswf(data) => data.kernel(x.line(), y.line()),
        }
    }

    /// `k₂(x, y) = Σ σ_m² e_m(x) e_m(y)`.
    pub fn kernel_squared(&self, x: &Point<T>, y: &Point<T>) -> T {
        match &self.family {
            Family::Periodic { s } => periodic::closed_form(2 * s, x.line(), y.line()),
            Family::Sphere { s, l_max } => sphere::zonal_sum(&self.zonal_weights(*s, *l_max, 2), x.sphere(), y.sphere()),
            Family::Pswf(data) => {
                let mut ex = vec![T::zero(); data.order()];
                let mut ey = vec![T::zero(); data.order()];
                data.eval(x.line(), &mut ex);
                data.eval(y.line(), &mut ey);
                self.eigenvalues
                    .iter()
                    .zip(ex.iter().zip(&ey))
                    .fold(T::zero(), |acc, (s, (a, b))| acc + *s * *s * *a * *b)
            }
        }
    }

    fn zonal_weights(&self, s: T, l_max: usize, nu: i32) -> Vec<T> {
        (0..=l_max)
            .map(|l| (T::one() + crate::scalar::count::<T>(l)).powf(-lit::<T>(2.0) * s * lit(nu as f64)))
            .collect()
    }

    /// Truncated kernel `k_{ν,T}(x, y) = Σ_{m ∈ T} σ_m^ν e_m(x) e_m(y)`.
    pub fn kernel_nu_t(&self, nu: u32, indices: &[usize], x: &Point<T>, y: &Point<T>) -> Result<T> {
        let mut ex = vec![T::zero(); indices.len()];
        let mut ey = vec![T::zero(); indices.len()];
        self.fill_subset(x, indices, &mut ex)?;
        self.fill_subset(y, indices, &mut ey)?;
        Ok(indices
            .iter()
            .zip(ex.iter().zip(&ey))
            .fold(T::zero(), |acc, (&m, (a, b))| acc + self.eigenvalues[m].powi(nu as i32) * *a * *b))
    }

    /// `Σf(x) = Σ_m σ_m ⟨f, e_m⟩ e_m(x)`.
    pub fn smoothed_eval(&self, f: &TargetFunction<T>, x: &Point<T>) -> Result<T> {
        f.check_support(self)?;
        let n = f.support_len();
        if n == 0 {
            return Ok(T::zero());
        }
        let mut e = vec![T::zero(); n];
        self.fill_eigenfunctions(x, &mut e)?;
        Ok(f.coefficients()
            .iter()
            .fold(T::zero(), |acc, (&m, &c)| acc + self.eigenvalues[m] * c * e[m]))
    }

    /// Gram matrix `K_ν(x) = (k_ν(x_i, x_j))` for `ν ∈ {1, 2}`.
    pub fn gram(&self, nodes: &[Point<T>], nu: u32) -> Result<DMatrix<T>> {
        let k = |a: &Point<T>, b: &Point<T>| match nu {
            1 => Ok(self.kernel(a, b)),
            2 => Ok(self.kernel_squared(a, b)),
            _ => Err(Error::InvalidParameter(format!("gram supports nu in {{1, 2}}, got {nu}"))),
        };
        let n = nodes.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = k(&nodes[i], &nodes[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `E_{i,j} = e_{indices[j]}(x_i)`.
    pub fn feature_matrix(&self, nodes: &[Point<T>], indices: &[usize]) -> Result<DMatrix<T>> {
        let mut e = DMatrix::zeros(nodes.len(), indices.len());
        let mut row = vec![T::zero(); indices.len()];
        for (i, x) in nodes.iter().enumerate() {
            self.fill_subset(x, indices, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                e[(i, j)] = *v;
            }
        }
        Ok(e)
    }

    /// `E_{i,m} = e_m(x_i)` for `m < count`.
    pub fn leading_feature_matrix(&self, nodes: &[Point<T>], count: usize) -> Result<DMatrix<T>> {
        let mut e = DMatrix::zeros(nodes.len(), count);
        let mut row = vec![T::zero(); count];
        for (i, x) in nodes.iter().enumerate() {
            self.fill_eigenfunctions(x, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                e[(i, j)] = *v;
            }
        }
        Ok(e)
    }

    /// Gram matrix of the truncated kernel `k_{ν,T}`.
    pub fn gram_truncated(&self, nodes: &[Point<T>], nu: u32, indices: &[usize]) -> Result<DMatrix<T>> {
        let e = self.feature_matrix(nodes, indices)?;
        let mut scaled = e.clone();
        for (j, &m) in indices.iter().enumerate() {
            let w = self.eigenvalues[m].powi(nu as i32);
            scaled.column_mut(j).scale_mut(w);
        }
        Ok(scaled * e.transpose())
    }
}
