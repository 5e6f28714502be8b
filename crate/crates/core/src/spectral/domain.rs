use rand::Rng;

use super::legendre::{composite_gauss_legendre, gauss_legendre};
use crate::scalar::{count, lit, Real};

/// A node of a design: a point on an interval or on the unit sphere S².
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point<T> {
    Line(T),
    Sphere([T; 3]),
}

impl<T: Real> Point<T> {
    pub fn coordinates(&self) -> Vec<T> {
        match self {
            Point::Line(x) => vec![*x],
            Point::Sphere(v) => v.to_vec(),
        }
    }

    /// Unwraps a 1-D coordinate.
    ///
    /// # Panics
    /// If the point lives on the sphere.
    pub fn line(&self) -> T {
        match self {
            Point::Line(x) => *x,
            Point::Sphere(_) => panic!("expected a point on an interval"),
        }
    }

    /// Unwraps a unit vector.
    ///
    /// # Panics
    /// If the point lives on an interval.
    pub fn sphere(&self) -> [T; 3] {
        match self {
            Point::Sphere(v) => *v,
            Point::Line(_) => panic!("expected a point on the sphere"),
        }
    }

    /// Builds a sphere point from polar angle cosine `z` and azimuth `phi`.
    pub fn from_polar(z: T, phi: T) -> Self {
        let r = (T::one() - z * z).max(T::zero()).sqrt();
        Point::Sphere([r * phi.cos(), r * phi.sin(), z])
    }
}

/// The space X together with its (uniform, probability) reference measure ω.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain<T> {
    Interval { lo: T, hi: T },
    Sphere,
}

/// Grid size used for sup-estimates of densities on intervals.
pub const LINE_ENVELOPE_GRID: usize = 4096;
/// Polar × azimuthal grid used for sup-estimates on the sphere.
pub const SPHERE_ENVELOPE_GRID: (usize, usize) = (200, 400);

impl<T: Real> Domain<T> {
    pub fn contains(&self, p: &Point<T>) -> bool {
        match (self, p) {
            (Domain::Interval { lo, hi }, Point::Line(x)) => *x >= *lo && *x <= *hi,
            (Domain::Sphere, Point::Sphere(v)) => {
                let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                (n2 - T::one()).abs() <= lit(1e-6)
            }
            _ => false,
        }
    }

    /// Draws one point from ω.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        match self {
            Domain::Interval { lo, hi } => {
                let u: T = lit(rng.random::<f64>());
                Point::Line(*lo + (*hi - *lo) * u)
            }
            Domain::Sphere => {
                let z: T = lit(2.0 * rng.random::<f64>() - 1.0);
                let phi: T = lit(std::f64::consts::TAU * rng.random::<f64>());
                Point::from_polar(z, phi)
            }
        }
    }

    /// Deterministic grid on which rejection envelopes are estimated.
    pub fn envelope_grid(&self) -> Vec<Point<T>> {
        match self {
            Domain::Interval { lo, hi } => {
                let n = LINE_ENVELOPE_GRID;
                (0..n)
                    .map(|i| Point::Line(*lo + (*hi - *lo) * count::<T>(i) / count::<T>(n - 1)))
                    .collect()
            }
            Domain::Sphere => {
                let (nz, nphi) = SPHERE_ENVELOPE_GRID;
                let mut grid = Vec::with_capacity(nz * nphi);
                for i in 0..nz {
                    let z = lit::<T>(-1.0) + lit::<T>(2.0) * count::<T>(i) / count::<T>(nz - 1);
                    for j in 0..nphi {
                        let phi = T::two_pi() * count::<T>(j) / count::<T>(nphi);
                        grid.push(Point::from_polar(z, phi));
                    }
                }
                grid
            }
        }
    }

    /// High-order quadrature for ω whose weights sum to one.
    ///
    /// Composite Gauss–Legendre with 10⁴ nodes on intervals; Gauss in cos θ
    /// times the uniform rule in φ (200 × 400) on the sphere.
    pub fn quadrature(&self) -> (Vec<Point<T>>, Vec<T>) {
        match self {
            Domain::Interval { lo, hi } => {
                let (x, w) = composite_gauss_legendre(*lo, *hi, 500, 20);
                let len = *hi - *lo;
                (x.into_iter().map(Point::Line).collect(), w.into_iter().map(|w| w / len).collect())
            }
            Domain::Sphere => {
                let (nz, nphi) = SPHERE_ENVELOPE_GRID;
                let (z, wz) = gauss_legendre::<T>(nz);
                let mut pts = Vec::with_capacity(nz * nphi);
                let mut wts = Vec::with_capacity(nz * nphi);
                for (zi, wi) in z.iter().zip(&wz) {
                    for j in 0..nphi {
                        let phi = T::two_pi() * count::<T>(j) / count::<T>(nphi);
                        pts.push(Point::from_polar(*zi, phi));
                        wts.push(*wi / (lit::<T>(2.0) * count::<T>(nphi)));
                    }
                }
                (pts, wts)
            }
        }
    }
}
