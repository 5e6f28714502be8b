//! Function reconstruction in reproducing kernel Hilbert spaces from
//! randomized node designs.
//!
//! The crate is generic over the scalar type through [`Real`]; the `f64`
//! aliases at the root cover the common case.

pub mod approximants;
pub mod designs;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spectral::{Domain, KernelSpec, Point, SpectralModel, TargetFunction};

/// Double-precision model.
pub type Model = SpectralModel<f64>;
/// Double-precision target.
pub type Target = TargetFunction<f64>;
