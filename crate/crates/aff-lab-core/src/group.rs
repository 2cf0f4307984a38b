//! Arithmetic and geometry of the affine group of the line.
//!
//! An element `(a, b)` acts as `x ↦ a·x + b`, `a > 0`. In the matrix picture
//! these are the upper-triangular matrices `[[a, b], [0, 1]]`, and the group
//! carries the left-invariant metric `ds² = (da² + db²)/a²`, i.e. the
//! half-plane model of the hyperbolic plane with `a` as the height.

use crate::scalar::{Real, Scalar};
use crate::{Error, Result};

/// Group element `(a, b)` with `a > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffPoint<T> {
    pub a: T,
    pub b: T,
}

/// Lie-algebra chart coordinates `x = ln a`, `y = b/a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraVector<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> AffPoint<T> {
    /// Checked constructor; rejects a non-positive dilation coordinate.
    pub fn new(a: T, b: T) -> Result<Self> {
        if a > T::zero() {
            Ok(AffPoint { a, b })
        } else {
            Err(Error::invalid("a", format!("{a:?}"), "a > 0"))
        }
    }

    pub fn identity() -> Self {
        AffPoint {
            a: T::one(),
            b: T::zero(),
        }
    }

    /// Group law: `(g ∘ h)(x) = g(h(x))`, i.e. `(g.a·h.a, g.a·h.b + g.b)`.
    pub fn compose(&self, h: &Self) -> Self {
        AffPoint {
            a: self.a.clone() * h.a.clone(),
            b: self.a.clone() * h.b.clone() + self.b.clone(),
        }
    }

    /// Two-sided inverse `(1/a, −b/a)`.
    pub fn inverse(&self) -> Self {
        let inv_a = T::one() / self.a.clone();
        AffPoint {
            a: inv_a.clone(),
            b: T::zero() - inv_a * self.b.clone(),
        }
    }
}

/// Exponential chart: `(x, y) ↦ (e^x, e^x·y)`.
///
/// Signals a range error when `e^x` overflows or underflows to zero.
pub fn exp_map<T: Real>(v: AlgebraVector<T>) -> Result<AffPoint<T>> {
    let a = v.x.exp();
    if !a.is_finite() || a <= T::zero() {
        return Err(Error::invalid(
            "x",
            format!("{:?}", v.x),
            "e^x representable as a positive float",
        ));
    }
    Ok(AffPoint { a, b: a * v.y })
}

/// Inverse chart: `(a, b) ↦ (ln a, b/a)`.
pub fn log_map<T: Real>(g: &AffPoint<T>) -> AlgebraVector<T> {
    AlgebraVector {
        x: g.a.ln(),
        y: g.b / g.a,
    }
}

/// `arcosh(1 + z)` for `z ≥ 0`, stable near `z = 0` where the naive
/// `acosh` form loses half the significant digits.
fn acosh1p<T: Real>(z: T) -> T {
    let two = T::one() + T::one();
    (z + (z * (z + two)).sqrt()).ln_1p()
}

/// Hyperbolic distance `r = arcosh(1 + |p−q|²/(2 p.a q.a))` between two
/// points of the half-plane; left-invariant for the group action.
pub fn hyperbolic_distance<T: Real>(p: &AffPoint<T>, q: &AffPoint<T>) -> T {
    let two = T::one() + T::one();
    let da = p.a - q.a;
    let db = p.b - q.b;
    let z = (da * da + db * db) / (two * p.a * q.a);
    acosh1p(z)
}

/// Volume of the hyperbolic ball of radius `R`: `2π(cosh R − 1)`, evaluated
/// as `4π sinh²(R/2)` so small radii do not cancel.
pub fn ball_volume<T: Real>(radius: T) -> Result<T> {
    if radius < T::zero() {
        return Err(Error::invalid(
            "radius",
            format!("{radius:?}"),
            "radius >= 0",
        ));
    }
    let two = T::one() + T::one();
    let s = (radius / two).sinh();
    Ok(two * two * T::PI() * s * s)
}
