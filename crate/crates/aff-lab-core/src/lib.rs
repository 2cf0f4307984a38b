//! Numerical laboratory for Brownian motion on the real affine group.
//!
//! The crate provides four layers that build on each other:
//!
//! * [`group`] — arithmetic and hyperbolic geometry of the group of maps
//!   `x ↦ a·x + b` with `a > 0`, generic over the scalar type;
//! * [`heat_kernel`] — quadrature for the hyperbolic-plane heat kernel and
//!   its Doob transform to the affine group;
//! * [`walk`], [`combinatorics`], [`estimators`] — samplers for the
//!   subgroup random walk and its bridge functionals, exact
//!   return-probability combinatorics, and Monte Carlo estimators;
//! * [`toy`] — an exactly solvable lattice walk on a dense subgroup of `R`
//!   used as a contrast model.
//!
//! All samplers draw from counter-based RNG streams so that results are
//! reproducible bit-for-bit for a fixed master seed, independent of worker
//! scheduling.

pub mod combinatorics;
pub mod estimators;
pub mod group;
pub mod heat_kernel;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod toy;
pub mod walk;

/// Group element over double precision, the working type of the numerical layers.
pub type GroupElement = group::AffPoint<f64>;
/// Lie-algebra chart point over double precision.
pub type AlgebraElement = group::AlgebraVector<f64>;
/// Exact-rational group element; used where tests need exact identities.
pub type RationalGroupElement = group::AffPoint<num::BigRational>;

pub use stats::EstimateWithError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: requires {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        requirement: &'static str,
    },
    #[error("quadrature error estimate {error:.3e} exceeds tolerance {tolerance:.3e} (value {value:.6e})")]
    QuadratureAccuracy {
        value: f64,
        error: f64,
        tolerance: f64,
    },
    #[error("path enumeration over {steps} steps exceeds cap of {cap}; use the Rao-Blackwell estimator for long horizons")]
    EnumerationCap { steps: usize, cap: usize },
    #[error("lattice support of {states} states exceeds cap of {cap}; use the Fourier evaluation for long horizons")]
    LatticeCap { states: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid<V: std::fmt::Display>(
        name: &'static str,
        value: V,
        requirement: &'static str,
    ) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            requirement,
        }
    }
}
