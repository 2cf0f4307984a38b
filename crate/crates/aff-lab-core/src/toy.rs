//! Lattice toy model: a random walk on Z^N embedded in R by a vector of
//! (declared) rationally independent scales.  Exact return and point
//! probabilities by dynamic programming in rational arithmetic, a spectral
//! (torus) evaluation for long horizons, quasi-local window probabilities,
//! and a Weyl equidistribution diagnostic.
//!
//! One step leaves the position unchanged with probability `p_0` and moves
//! `±1` along axis `j` with probability `p_j/2` each.  The real-valued
//! position is `x_n = Σ_j α_j d_j` for the lattice coordinate `d`; exact
//! lattice arithmetic never touches the irrational scales, which enter only
//! through window sums and the Weyl average.

use crate::quad::{integrate, QuadratureOptions};
use crate::{Error, Result};
use num::bigint::Sign;
use num::integer::lcm;
use num::rational::Rational64;
use num::{BigRational, BigUint, One, ToPrimitive, Zero};
use std::f64::consts::PI;

/// Largest number of lattice states the exact dynamic program will allocate.
pub const LATTICE_STATE_CAP: u64 = 3_000_000;

/// Convert an exact nonnegative rational to `f64` by aligning both parts to
/// 64-bit windows; accurate to a few ulp for values above ~1e-19, which
/// covers every probability the lattice model reports.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.numer().sign() == Sign::Minus;
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let shift = (num.bits().max(den.bits()).saturating_sub(64)) as usize;
    let nf = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let df = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    let value = nf / df;
    if negative {
        -value
    } else {
        value
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// The lattice walk's law: scales `alpha`, hold/step probabilities `p` (as
/// exact rationals `p_0, p_1, ..., p_N`), and the caller's assertion that
/// the scales are rationally independent (unverifiable numerically; the
/// Weyl diagnostic can only falsify it).
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    alpha: Vec<f64>,
    p: Vec<Rational64>,
    declared_independent: bool,
}

impl ToyModel {
    pub fn new(alpha: Vec<f64>, p: Vec<Rational64>, declared_independent: bool) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("alpha", "[]", "at least one scale"));
        }
        if p.len() != alpha.len() + 1 {
            return Err(Error::invalid(
                "p",
                p.len(),
                "one holding probability plus one probability per scale",
            ));
        }
        for &a in &alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid("alpha", a, "positive finite scales"));
            }
        }
        let one = Rational64::one();
        let zero = Rational64::zero();
        if p[0] < zero || p[0] >= one {
            return Err(Error::invalid("p[0]", p[0], "a probability in [0, 1)"));
        }
        for (i, &pi) in p.iter().enumerate().skip(1) {
            if pi <= zero || pi > one {
                return Err(Error::invalid("p[i]", format!("p[{i}] = {pi}"), "in (0, 1]"));
            }
        }
        let total: Rational64 = p.iter().sum();
        if total != one {
            return Err(Error::invalid("p", total, "probabilities summing to exactly 1"));
        }
        Ok(Self {
            alpha,
            p,
            declared_independent,
        })
    }

    /// Number of lattice axes `N`.
    pub fn dims(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `p_0, p_1, ..., p_N` as exact rationals.
    pub fn probabilities(&self) -> &[Rational64] {
        &self.p
    }

    pub fn declared_independent(&self) -> bool {
        self.declared_independent
    }

    /// Step variance of the real position: `σ² = Σ_j p_j α_j²`.
    pub fn sigma2(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.p[1..])
            .map(|(&a, &pj)| a * a * (*pj.numer() as f64 / *pj.denom() as f64))
            .sum()
    }

    fn p_f64(&self, i: usize) -> f64 {
        *self.p[i].numer() as f64 / *self.p[i].denom() as f64
    }

    /// Common denominator `D` of `p_0` and all `p_j/2`, and the integer step
    /// weights over `D`: the hold weight and one weight per signed axis
    /// move.
    fn integer_weights(&self) -> (u64, u64, Vec<u64>) {
        let half = Rational64::new(1, 2);
        let mut denom: i64 = *self.p[0].denom();
        for &pj in &self.p[1..] {
            denom = lcm(denom, *(pj * half).denom());
        }
        let to_weight = |r: Rational64| -> u64 {
            let scaled = r * Rational64::from_integer(denom);
            debug_assert!(scaled.is_integer());
            scaled.to_integer() as u64
        };
        let hold = to_weight(self.p[0]);
        let moves = self.p[1..].iter().map(|&pj| to_weight(pj * half)).collect();
        (denom as u64, hold, moves)
    }
}

// ---------------------------------------------------------------------------
// Exact dynamic program
// ---------------------------------------------------------------------------

/// The exact distribution of the lattice position after `horizon` steps:
/// integer numerators over the common denominator `D^horizon`, on the box
/// `[-horizon, horizon]^N`.
#[derive(Debug, Clone)]
pub struct LatticeDistribution {
    horizon: usize,
    dims: usize,
    side: usize,
    strides: Vec<usize>,
    numerators: Vec<BigUint>,
    denominator: BigUint,
}

/// Run the exact DP for `horizon` steps of the model's walk.
///
/// Errors with [`Error::LatticeCap`] when the state box exceeds
/// [`LATTICE_STATE_CAP`]; long horizons should use [`toy_fourier_return`].
pub fn toy_distribution(horizon: usize, model: &ToyModel) -> Result<LatticeDistribution> {
    let dims = model.dims();
    let side = 2 * horizon + 1;
    let states_wide = (side as u128).checked_pow(dims as u32);
    let states = match states_wide {
        Some(s) if s <= LATTICE_STATE_CAP as u128 => s as usize,
        _ => {
            return Err(Error::LatticeCap {
                states: states_wide.map_or(u64::MAX, |s| s.min(u64::MAX as u128) as u64),
                cap: LATTICE_STATE_CAP,
            });
        }
    };
    let strides: Vec<usize> = (0..dims).map(|j| side.pow(j as u32)).collect();
    let (denom, hold, moves) = model.integer_weights();
    let center: usize = strides.iter().map(|s| s * horizon).sum();
    let mut cur = vec![BigUint::zero(); states];
    cur[center] = BigUint::one();
    let mut coords = vec![0usize; dims];
    for _ in 0..horizon {
        let mut next = vec![BigUint::zero(); states];
        coords.fill(0);
        for idx in 0..states {
            if !cur[idx].is_zero() {
                let v = &cur[idx];
                if hold > 0 {
                    next[idx] += v * hold;
                }
                for (j, &w) in moves.iter().enumerate() {
                    if coords[j] + 1 < side {
                        next[idx + strides[j]] += v * w;
                    }
                    if coords[j] > 0 {
                        next[idx - strides[j]] += v * w;
                    }
                }
            }
            // Odometer: advance the coordinate decoding of idx.
            for (c, _) in coords.iter_mut().zip(0..dims) {
                *c += 1;
                if *c < side {
                    break;
                }
                *c = 0;
            }
        }
        cur = next;
    }
    Ok(LatticeDistribution {
        horizon,
        dims,
        side,
        strides,
        numerators: cur,
        denominator: BigUint::from(denom).pow(horizon as u32),
    })
}

impl LatticeDistribution {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    fn index_of(&self, d: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (j, &dj) in d.iter().enumerate() {
            let shifted = dj + self.horizon as i64;
            if shifted < 0 || shifted >= self.side as i64 {
                return None;
            }
            idx += self.strides[j] * shifted as usize;
        }
        Some(idx)
    }

    /// Exact `P[X_horizon = d]`; zero outside the reachable box.
    pub fn prob(&self, d: &[i64]) -> Result<BigRational> {
        if d.len() != self.dims {
            return Err(Error::invalid(
                "d",
                d.len(),
                "one coordinate per model axis",
            ));
        }
        Ok(match self.index_of(d) {
            Some(idx) => BigRational::new(
                self.numerators[idx].clone().into(),
                self.denominator.clone().into(),
            ),
            None => BigRational::zero(),
        })
    }

    /// Exact total mass (must be 1).
    pub fn total(&self) -> BigRational {
        let mut sum = BigUint::zero();
        for v in &self.numerators {
            sum += v;
        }
        BigRational::new(sum.into(), self.denominator.clone().into())
    }

    /// Iterate `(coordinates, numerator)` over occupied states.
    fn for_each_occupied(&self, mut visit: impl FnMut(&[i64], &BigUint)) {
        let mut coords = vec![0usize; self.dims];
        let mut signed = vec![0i64; self.dims];
        for idx in 0..self.numerators.len() {
            if !self.numerators[idx].is_zero() {
                for (s, &c) in signed.iter_mut().zip(coords.iter()) {
                    *s = c as i64 - self.horizon as i64;
                }
                visit(&signed, &self.numerators[idx]);
            }
            for c in coords.iter_mut() {
                *c += 1;
                if *c < self.side {
                    break;
                }
                *c = 0;
            }
        }
    }

    /// Exact probability that the real position `⟨α, d⟩` lies in the open
    /// window `(-deltainv, deltainv)`.
    pub fn window_prob(&self, deltainv: f64, model: &ToyModel) -> Result<BigRational> {
        if model.dims() != self.dims {
            return Err(Error::invalid("model", model.dims(), "matching dimension"));
        }
        if !(deltainv > 0.0) {
            return Err(Error::invalid("deltainv", deltainv, "a positive window"));
        }
        let mut sum = BigUint::zero();
        self.for_each_occupied(|d, num| {
            let x: f64 = d
                .iter()
                .zip(model.alpha())
                .map(|(&dj, &aj)| dj as f64 * aj)
                .sum();
            if x.abs() < deltainv {
                sum += num;
            }
        });
        Ok(BigRational::new(sum.into(), self.denominator.clone().into()))
    }
}

/// Exact return probability `r_n = P[X_n = 0]`.
pub fn toy_exact_return(n: usize, model: &ToyModel) -> Result<BigRational> {
    let dist = toy_distribution(n, model)?;
    dist.prob(&vec![0i64; model.dims()])
}

// ---------------------------------------------------------------------------
// Point probability with Gaussian comparator
// ---------------------------------------------------------------------------

/// Output of [`toy_point_prob`].
#[derive(Debug, Clone)]
pub struct ToyPointProb {
    pub exact: BigRational,
    pub value: f64,
    /// Gaussian product comparator
    /// `Π_j (2π p_j n)^{-1/2} exp(-d_j²/(2 p_j n))`.
    pub comparator: f64,
    /// `value / comparator`.
    pub ratio: f64,
}

/// Local-limit comparator for the lattice point `d` at horizon `n`.
pub fn point_comparator(n: usize, d: &[i64], model: &ToyModel) -> f64 {
    let nf = n as f64;
    d.iter()
        .enumerate()
        .map(|(j, &dj)| {
            let pj = model.p_f64(j + 1);
            (2.0 * PI * pj * nf).powf(-0.5) * (-(dj * dj) as f64 / (2.0 * pj * nf)).exp()
        })
        .product()
}

/// Exact `P[X_n = d]` with its Gaussian comparator, from a precomputed
/// distribution.
pub fn point_prob_from(
    dist: &LatticeDistribution,
    d: &[i64],
    model: &ToyModel,
) -> Result<ToyPointProb> {
    let exact = dist.prob(d)?;
    let value = ratio_to_f64(&exact);
    let comparator = point_comparator(dist.horizon(), d, model);
    Ok(ToyPointProb {
        ratio: value / comparator,
        exact,
        value,
        comparator,
    })
}

/// Exact `P[X_n = d]` with its Gaussian comparator (runs the DP).
pub fn toy_point_prob(n: usize, d: &[i64], model: &ToyModel) -> Result<ToyPointProb> {
    point_prob_from(&toy_distribution(n, model)?, d, model)
}

// ---------------------------------------------------------------------------
// Window probability
// ---------------------------------------------------------------------------

/// Output of [`toy_window_prob`].
#[derive(Debug, Clone)]
pub struct ToyWindowProb {
    /// Horizon actually simulated (`2n`).
    pub horizon: usize,
    pub deltainv: f64,
    pub exact: BigRational,
    pub value: f64,
    /// Integrated local-limit comparator `2 δ⁻¹ / ((2π·2n)^{1/2} σ)`.
    /// For models with `p_0 = 0` the window mixes parity classes and this
    /// comparator is a heuristic reference only.
    pub comparator: f64,
    /// `value / comparator`.
    pub ratio: f64,
}

/// Window comparator `2 δ⁻¹ / ((2π·horizon)^{1/2} σ)`.
pub fn window_comparator(horizon: usize, deltainv: f64, model: &ToyModel) -> f64 {
    2.0 * deltainv / ((2.0 * PI * horizon as f64).sqrt() * model.sigma2().sqrt())
}

/// Quasi-local window probability from a precomputed distribution at
/// horizon `2n`.
pub fn window_prob_from(
    dist: &LatticeDistribution,
    deltainv: f64,
    model: &ToyModel,
) -> Result<ToyWindowProb> {
    let exact = dist.window_prob(deltainv, model)?;
    let value = ratio_to_f64(&exact);
    let comparator = window_comparator(dist.horizon(), deltainv, model);
    Ok(ToyWindowProb {
        horizon: dist.horizon(),
        deltainv,
        ratio: value / comparator,
        exact,
        value,
        comparator,
    })
}

/// Exact probability that `x_{2n}` lies in `(-deltainv, deltainv)`,
/// with the integrated local-limit comparator.
pub fn toy_window_prob(n: usize, deltainv: f64, model: &ToyModel) -> Result<ToyWindowProb> {
    let dist = toy_distribution(2 * n, model)?;
    window_prob_from(&dist, deltainv, model)
}

// ---------------------------------------------------------------------------
// Spectral (torus) evaluation
// ---------------------------------------------------------------------------

fn torus_mean(model: &ToyModel, n: usize, nodes: usize) -> f64 {
    let dims = model.dims();
    let p0 = model.p_f64(0);
    let pj: Vec<f64> = (1..=dims).map(|j| model.p_f64(j)).collect();
    // Midpoint-offset equispaced nodes: the rule is exact for trigonometric
    // polynomials of per-axis degree < nodes.
    let cos_table: Vec<f64> = (0..nodes)
        .map(|i| (2.0 * PI * (i as f64 + 0.5) / nodes as f64).cos())
        .collect();
    let mut index = vec![0usize; dims];
    let total_points = (nodes as u128).pow(dims as u32) as usize;
    let mut sum = 0.0;
    for _ in 0..total_points {
        let mut phi = p0;
        for (j, &i) in index.iter().enumerate() {
            phi += pj[j] * cos_table[i];
        }
        sum += phi.powi(n as i32);
        for i in index.iter_mut() {
            *i += 1;
            if *i < nodes {
                break;
            }
            *i = 0;
        }
    }
    sum / total_points as f64
}

/// Return probability by the characteristic-function integral over the
/// torus, `r_n = (2π)^{-N} ∫ (p_0 + Σ p_j cos s_j)^n ds`.
///
/// Uses an equispaced rectangle rule, exact for the degree-`n`
/// trigonometric integrand when `n ≤ 256` (with `n+1` nodes per axis); for
/// larger `n` the node count scales as `8√n` and the value is validated
/// against a finer grid, erroring if the two disagree.
pub fn toy_fourier_return(n: usize, model: &ToyModel) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", n, "at least one step"));
    }
    if n <= 256 {
        return Ok(torus_mean(model, n, n + 1));
    }
    let nodes = ((8.0 * (n as f64).sqrt()).ceil() as usize).max(33);
    let value = torus_mean(model, n, nodes);
    let finer = torus_mean(model, n, (3 * nodes) / 2 + 1);
    let error = (value - finer).abs();
    let tolerance = 1e-9 * finer.abs().max(1e-300) + 1e-12;
    if error > tolerance {
        return Err(Error::QuadratureAccuracy {
            value: finer,
            error,
            tolerance,
        });
    }
    Ok(finer)
}

// ---------------------------------------------------------------------------
// Weyl equidistribution diagnostic
// ---------------------------------------------------------------------------

/// Output of [`weyl_average`].
#[derive(Debug, Clone)]
pub struct WeylAverage {
    /// Box average of `f(⟨α, d⟩ mod L)` over `|d_j| ≤ radius`.
    pub average: f64,
    /// `(1/L) ∫_0^L f`, the equidistribution limit when the scales are
    /// rationally independent.
    pub comparator: f64,
    /// Number of lattice points averaged.
    pub points: u64,
}

/// Average a periodic test function over the projected lattice
/// `{⟨α, d⟩ mod L : |d_j| ≤ radius}`, against its mean over one period.
/// Under rational independence the two agree as the radius grows; a
/// persistent gap falsifies the declared independence.
pub fn weyl_average<F: Fn(f64) -> f64>(
    model: &ToyModel,
    period: f64,
    f: F,
    radius: i64,
) -> Result<WeylAverage> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid("period", period, "a positive finite period"));
    }
    if radius < 0 {
        return Err(Error::invalid("radius", radius, "a nonnegative radius"));
    }
    let dims = model.dims();
    let side = (2 * radius + 1) as u64;
    let points = side.pow(dims as u32);
    let mut index = vec![-radius; dims];
    let mut sum = 0.0;
    for _ in 0..points {
        let x: f64 = index
            .iter()
            .zip(model.alpha())
            .map(|(&dj, &aj)| dj as f64 * aj)
            .sum();
        sum += f(x.rem_euclid(period));
        for i in index.iter_mut() {
            *i += 1;
            if *i <= radius {
                break;
            }
            *i = -radius;
        }
    }
    let quad = integrate(&f, 0.0, period, &QuadratureOptions::default())?;
    Ok(WeylAverage {
        average: sum / points as f64,
        comparator: quad.value / period,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num::BigInt;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn r(num: i64, den: i64) -> Rational64 {
        Rational64::new(num, den)
    }

    fn big(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// Simple walk on one axis: p0 = 0, p1 = 1.
    fn simple_walk() -> ToyModel {
        ToyModel::new(vec![1.0], vec![r(0, 1), r(1, 1)], true).unwrap()
    }

    /// The two-scale example model: α = (1, √2), p = (1/5, 2/5, 2/5).
    fn example_model() -> ToyModel {
        ToyModel::new(
            vec![1.0, 2.0f64.sqrt()],
            vec![r(1, 5), r(2, 5), r(2, 5)],
            true,
        )
        .unwrap()
    }

    /// Shared horizon-400 distribution of the example model (expensive DP:
    /// built once for the point and window tests).
    fn example_dist_400() -> &'static LatticeDistribution {
        static DIST: OnceLock<LatticeDistribution> = OnceLock::new();
        DIST.get_or_init(|| toy_distribution(400, &example_model()).unwrap())
    }

    #[test]
    fn model_validation() {
        assert!(ToyModel::new(vec![], vec![r(1, 1)], true).is_err());
        assert!(ToyModel::new(vec![1.0], vec![r(1, 2)], true).is_err());
        assert!(ToyModel::new(vec![1.0], vec![r(1, 2), r(1, 3)], true).is_err());
        assert!(ToyModel::new(vec![-1.0], vec![r(0, 1), r(1, 1)], true).is_err());
        assert!(ToyModel::new(vec![1.0], vec![r(1, 1), r(0, 1)], true).is_err());
        assert!(ToyModel::new(vec![1.0, 1.0], vec![r(1, 1), r(-1, 2), r(1, 2)], true).is_err());
        let model = example_model();
        assert_eq!(model.dims(), 2);
        assert!(model.declared_independent());
        assert_relative_eq!(model.sigma2(), 1.2, max_relative = 1e-15);
    }

    #[test]
    fn simple_walk_return_probabilities() {
        let model = simple_walk();
        assert_eq!(toy_exact_return(1, &model).unwrap(), BigRational::zero());
        assert_eq!(toy_exact_return(2, &model).unwrap(), big(1, 2));
        assert_eq!(toy_exact_return(4, &model).unwrap(), big(3, 8));
        // Odd horizons vanish when p0 = 0.
        for n in [1usize, 3, 5, 7] {
            assert_eq!(toy_exact_return(n, &model).unwrap(), BigRational::zero());
        }
    }

    #[test]
    fn two_axis_return_at_two_steps() {
        // p0 = 0, p1 = p2 = 1/2: return in two steps needs the same axis
        // and opposite signs: 2 axes × 2 orders × (1/4 · 1/4) = 1/4.
        let model = ToyModel::new(vec![1.0, 2.0f64.sqrt()], vec![r(0, 1), r(1, 2), r(1, 2)], true)
            .unwrap();
        assert_eq!(toy_exact_return(2, &model).unwrap(), big(1, 4));
    }

    #[test]
    fn distribution_is_normalized_and_symmetric() {
        let model = example_model();
        let dist = toy_distribution(9, &model).unwrap();
        assert_eq!(dist.total(), BigRational::one());
        for d1 in -9i64..=9 {
            for d2 in -9i64..=9 {
                assert_eq!(
                    dist.prob(&[d1, d2]).unwrap(),
                    dist.prob(&[-d1, -d2]).unwrap(),
                    "symmetry at ({d1},{d2})"
                );
            }
        }
        // Out-of-box points have probability zero.
        assert_eq!(dist.prob(&[10, 0]).unwrap(), BigRational::zero());
        assert!(dist.prob(&[1]).is_err());
    }

    #[test]
    fn fourier_matches_dp() {
        let one_axis = ToyModel::new(vec![1.0], vec![r(1, 3), r(2, 3)], true).unwrap();
        for n in 1..=12 {
            let exact = ratio_to_f64(&toy_exact_return(n, &one_axis).unwrap());
            let fourier = toy_fourier_return(n, &one_axis).unwrap();
            assert_abs_diff_eq!(fourier, exact, epsilon = 1e-10);
        }
        let model = example_model();
        for n in [1usize, 2, 3, 7, 16, 32, 64] {
            let exact = ratio_to_f64(&toy_exact_return(n, &model).unwrap());
            let fourier = toy_fourier_return(n, &model).unwrap();
            assert_abs_diff_eq!(fourier, exact, epsilon = 1e-10);
        }
        let three_axis = ToyModel::new(
            vec![1.0, 2.0f64.sqrt(), 3.0f64.sqrt()],
            vec![r(1, 4), r(1, 4), r(1, 4), r(1, 4)],
            true,
        )
        .unwrap();
        for n in [2usize, 5, 12] {
            let exact = ratio_to_f64(&toy_exact_return(n, &three_axis).unwrap());
            let fourier = toy_fourier_return(n, &three_axis).unwrap();
            assert_abs_diff_eq!(fourier, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn fourier_long_horizon_matches_local_limit() {
        // Pure-step model: parity doubles the live-lattice constant.
        let model = ToyModel::new(vec![1.0, 2.0f64.sqrt()], vec![r(0, 1), r(1, 2), r(1, 2)], true)
            .unwrap();
        let n = 10_000usize;
        let r_n = toy_fourier_return(n, &model).unwrap();
        let c = 2.0 / PI; // 2·Π_j (2π p_j)^{-1/2} = 2/π at p = 1/2, 1/2.
        assert!(
            (r_n * n as f64 / c - 1.0).abs() < 0.05,
            "r_n·n = {} vs 2C(p) = {c}",
            r_n * n as f64
        );
        // Lazy model (p0 > 0): no parity factor.
        let lazy = example_model();
        let r_lazy = toy_fourier_return(n, &lazy).unwrap();
        let c_lazy = 1.0 / (2.0 * PI * 0.4); // Π_j (2π·0.4)^{-1/2}
        assert!(
            (r_lazy * n as f64 / c_lazy - 1.0).abs() < 0.05,
            "r_n·n = {} vs C(p) = {c_lazy}",
            r_lazy * n as f64
        );
    }

    #[test]
    fn point_prob_consistency() {
        let model = example_model();
        // d = 0 reduces to the exact return probability.
        let point = toy_point_prob(6, &[0, 0], &model).unwrap();
        assert_eq!(point.exact, toy_exact_return(6, &model).unwrap());
        // Parity: pure-step model, odd coordinate sum, even horizon.
        let pure = ToyModel::new(vec![1.0, 2.0f64.sqrt()], vec![r(0, 1), r(1, 2), r(1, 2)], true)
            .unwrap();
        let blocked = toy_point_prob(6, &[2, 1], &pure).unwrap();
        assert_eq!(blocked.exact, BigRational::zero());
        assert!(blocked.comparator > 0.0);
    }

    #[test]
    fn point_prob_matches_gaussian_at_long_horizon() {
        let model = example_model();
        let point = point_prob_from(example_dist_400(), &[4, -2], &model).unwrap();
        assert!(
            (0.9..=1.1).contains(&point.ratio),
            "ratio {} (exact {} vs comparator {})",
            point.ratio,
            point.value,
            point.comparator
        );
    }

    #[test]
    fn window_prob_basics() {
        let model = example_model();
        // A window beyond the maximal reach has probability exactly 1.
        let horizon = 6usize;
        let reach: f64 = model.alpha().iter().sum::<f64>() * horizon as f64 + 1.0;
        let full = toy_window_prob(3, reach, &model).unwrap();
        assert_eq!(full.exact, BigRational::one());
        // Monotone in the window width.
        let narrow = toy_window_prob(3, 0.5, &model).unwrap();
        let wide = toy_window_prob(3, 2.0, &model).unwrap();
        assert!(narrow.exact <= wide.exact);
        assert!(toy_window_prob(3, 0.0, &model).is_err());
    }

    #[test]
    fn window_prob_restores_sqrt_n_rate() {
        let model = example_model();
        let n = 200usize;
        let deltainv = (n as f64).powf(0.3);
        let window = window_prob_from(example_dist_400(), deltainv, &model).unwrap();
        assert!(
            (window.ratio - 1.0).abs() < 0.10,
            "ratio {} (exact {} vs comparator {})",
            window.ratio,
            window.value,
            window.comparator
        );
    }

    #[test]
    fn lattice_cap_directs_to_fourier() {
        let model = example_model();
        let err = toy_distribution(5_000, &model).unwrap_err();
        match err {
            Error::LatticeCap { states, cap } => {
                assert!(states > cap);
                assert_eq!(cap, LATTICE_STATE_CAP);
            }
            other => panic!("expected LatticeCap, got {other:?}"),
        }
    }

    #[test]
    fn weyl_average_diagnoses_equidistribution() {
        let model = example_model();
        // Constant test function: average exactly 1.
        let constant = weyl_average(&model, 1.0, |_| 1.0, 60).unwrap();
        assert_relative_eq!(constant.average, 1.0, max_relative = 1e-12);
        assert_relative_eq!(constant.comparator, 1.0, max_relative = 1e-9);
        assert_eq!(constant.points, 121 * 121);
        // Irrational scales: the first harmonic averages out.
        let harmonic = weyl_average(&model, 1.0, |x| (2.0 * PI * x).cos(), 60).unwrap();
        assert!(
            harmonic.average.abs() <= 0.05,
            "average {} should be near 0",
            harmonic.average
        );
        assert_abs_diff_eq!(harmonic.comparator, 0.0, epsilon = 1e-9);
        // Negative control: rationally dependent scales (1, 1/2) project
        // onto the half-integer lattice, where the second harmonic is
        // identically 1 — the diagnostic flags non-equidistribution.
        let dependent =
            ToyModel::new(vec![1.0, 0.5], vec![r(1, 5), r(2, 5), r(2, 5)], false).unwrap();
        let stuck = weyl_average(&dependent, 1.0, |x| (4.0 * PI * x).cos(), 60).unwrap();
        assert!(
            stuck.average > 0.5,
            "dependent scales should not equidistribute: {}",
            stuck.average
        );
        assert_abs_diff_eq!(stuck.comparator, 0.0, epsilon = 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_distribution_normalized_and_symmetric(
            n in 1usize..=6,
            hold_num in 0i64..3,
            w1 in 1i64..4,
            w2 in 1i64..4,
        ) {
            let total = hold_num + w1 + w2;
            let model = ToyModel::new(
                vec![1.0, 2.0f64.sqrt()],
                vec![
                    Rational64::new(hold_num, total),
                    Rational64::new(w1, total),
                    Rational64::new(w2, total),
                ],
                true,
            )
            .unwrap();
            let dist = toy_distribution(n, &model).unwrap();
            prop_assert_eq!(dist.total(), BigRational::one());
            let m = n as i64;
            for d1 in -m..=m {
                for d2 in -m..=m {
                    prop_assert_eq!(
                        dist.prob(&[d1, d2]).unwrap(),
                        dist.prob(&[-d1, -d2]).unwrap()
                    );
                }
            }
        }
    }
}
