//! Scalar abstractions: the group law is written once, over any ordered
//! field-like scalar, so the same code path serves `f64`, `f32`, and exact
//! rationals. The geometric layer additionally needs floating transcendentals.

use num::traits::{Float, FloatConst, Num};

/// Minimal scalar for group arithmetic: ring/field operations plus an order
/// (the dilation coordinate must be checked positive). Satisfied by `f32`,
/// `f64`, and `num::BigRational`.
pub trait Scalar: Clone + Num + PartialOrd + std::fmt::Debug {}

impl<T> Scalar for T where T: Clone + Num + PartialOrd + std::fmt::Debug {}

/// Floating scalar for the chart and metric layer (`exp`, `ln`, `cosh`, π).
pub trait Real: Float + FloatConst + std::fmt::Debug {}

impl<T> Real for T where T: Float + FloatConst + std::fmt::Debug {}
