//! Exact combinatorics for the simple random walk driving the subgroup model:
//! local-time distributions, exact return probabilities of the lattice
//! subgroup walk, Rao-Blackwellized return estimators, decay-rate fits, and
//! tube-confinement probabilities.
//!
//! The subgroup walk returns to the identity after `2n` steps exactly when
//! the driving walk forms a bridge (`S_{2n} = 0`) and every level's
//! second-coordinate innovations cancel.  Conditioning on the first
//! coordinate, the probability that level `a`'s innovations cancel is
//! `C(D_a, D_a/2) 2^{-D_a}` when the departure count `D_a` is even and zero
//! otherwise, which reduces the return probability to a sum over bridge
//! paths of products of central binomial weights.

use crate::stats::{parallel_mc_with, EstimateWithError};
use crate::{Error, Result};
use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};

/// Largest even horizon accepted by [`exact_return_prob`]'s enumeration.
pub const ENUMERATION_CAP: usize = 24;
/// Largest even horizon accepted by [`return_prob_dp`] (floating point).
pub const DP_FLOAT_CAP: usize = 512;
/// Largest even horizon accepted by [`return_prob_dp_exact`].
pub const DP_EXACT_CAP: usize = 32;
/// Largest step count (`2n`) for which [`tube_probability`] reports an
/// exact rational value alongside the floating-point one.
pub const TUBE_EXACT_CAP: usize = 64;

fn require_even_horizon(name: &'static str, horizon: usize) -> Result<()> {
    if horizon == 0 || horizon % 2 != 0 {
        return Err(Error::invalid(name, horizon, "a positive even step count"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binomial helpers
// ---------------------------------------------------------------------------

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 0..k {
        result = result * BigUint::from(n - k + i + 1) / BigUint::from(i + 1);
    }
    result
}

/// Central binomial weights `w[d] = C(d, d/2) 2^{-d}` for even `d <= max_d`
/// (odd entries are zero).  `w[d]` is the probability that `d` fair signs
/// cancel exactly.
pub fn central_weight_table(max_d: usize) -> Vec<f64> {
    let mut w = vec![0.0; max_d + 1];
    w[0] = 1.0;
    let mut value = 1.0;
    for d in (2..=max_d).step_by(2) {
        value *= (d - 1) as f64 / d as f64;
        w[d] = value;
    }
    w
}

/// `ln P[S_{2n} = 0]` for the simple random walk, computed from exact
/// log-factorial sums (no Stirling truncation error).
pub fn ln_central_binomial_prob(horizon: usize) -> Result<f64> {
    require_even_horizon("horizon", horizon)?;
    let n = horizon / 2;
    let mut ln_c = 0.0;
    for k in 1..=n {
        ln_c += ((n + k) as f64).ln() - (k as f64).ln();
    }
    Ok(ln_c - horizon as f64 * std::f64::consts::LN_2)
}

/// Exact `P[S_{2n} = 0] = C(2n, n) 2^{-2n}`.
pub fn central_binomial_prob_exact(horizon: usize) -> Result<BigRational> {
    require_even_horizon("horizon", horizon)?;
    let n = (horizon / 2) as u64;
    let num = BigInt::from(big_binomial(horizon as u64, n));
    let den = BigInt::one() << horizon;
    Ok(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// Local-time distribution
// ---------------------------------------------------------------------------

/// `P[S_{2n} >= level]` as an exact rational (`level >= 0`).
fn upper_tail_prob(horizon: usize, level: i64) -> BigRational {
    let n2 = horizon as u64;
    // S_{2n} >= level  <=>  #up-steps >= ceil((2n + level)/2).
    let start = ((n2 as i64 + level) as u64).div_ceil(2);
    let mut sum = BigUint::zero();
    for i in start..=n2 {
        sum += big_binomial(n2, i);
    }
    BigRational::new(BigInt::from(sum), BigInt::one() << horizon)
}

/// Exact distribution of the local time `L(2n, a) = #{1 <= k <= 2n : S_k = a}`
/// of the simple random walk.
///
/// Closed forms: for `a = 0`, `P[L = k] = C(2n-k, n) 2^{k-2n}` for all
/// `k >= 0`; for even `a != 0` and `k >= 1`,
/// `P[L = k] = C(2n-k+1, (2n+|a|)/2) 2^{-(2n-k+1)}`; for odd `a` and
/// `k >= 1`, `P[L = k] = C(2n-k, (2n+|a|-1)/2) 2^{-(2n-k)}`.  For `a != 0`,
/// `k = 0` the closed forms do not apply and the value is computed from the
/// reflection identity `P[L = 0] = 1 - P[S_{2n} >= |a|] - P[S_{2n} >= |a|+1]`.
pub fn local_time_pmf(horizon: usize, a: i64, k: usize) -> Result<BigRational> {
    require_even_horizon("horizon", horizon)?;
    let n2 = horizon as u64;
    let n = n2 / 2;
    let alpha = a.unsigned_abs();
    if k as u64 > n2 {
        return Ok(BigRational::zero());
    }
    if a == 0 {
        // Valid for every k >= 0, including k = 0.
        let num = BigInt::from(big_binomial(n2 - k as u64, n));
        let den = BigInt::one() << (horizon - k);
        return Ok(BigRational::new(num, den));
    }
    if k == 0 {
        let hit = upper_tail_prob(horizon, alpha as i64)
            + upper_tail_prob(horizon, alpha as i64 + 1);
        return Ok(BigRational::one() - hit);
    }
    let k = k as u64;
    let (top, bottom, shift) = if alpha % 2 == 0 {
        (n2 - k + 1, (n2 + alpha) / 2, n2 - k + 1)
    } else {
        (n2 - k, (n2 + alpha - 1) / 2, n2 - k)
    };
    let num = BigInt::from(big_binomial(top, bottom));
    let den = BigInt::one() << shift;
    Ok(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// Exact return probability: bridge enumeration
// ---------------------------------------------------------------------------

/// Advance a Gosper iterator: next integer with the same popcount.
fn next_combination(v: u64) -> u64 {
    let t = v | (v - 1);
    (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1))
}

/// Exact return probability of the subgroup walk after `horizon = 2n` steps,
/// by enumerating all `C(2n, n)` bridge paths of the driving walk and
/// summing the product of central binomial weights over visited levels.
///
/// Capped at [`ENUMERATION_CAP`] steps; longer horizons return
/// [`Error::EnumerationCap`] and should use [`return_prob_dp`] or the
/// Rao-Blackwellized estimator.
pub fn exact_return_prob(horizon: usize) -> Result<BigRational> {
    require_even_horizon("horizon", horizon)?;
    if horizon > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            steps: horizon,
            cap: ENUMERATION_CAP,
        });
    }
    let n = horizon / 2;
    // Central binomial coefficients C(d, d/2) for even d <= 2n.
    let mut central = vec![0u64; horizon + 1];
    for d in (0..=horizon).step_by(2) {
        central[d] = big_binomial(d as u64, (d / 2) as u64)
            .to_u64()
            .expect("central binomial fits u64 for d <= 24");
    }
    let offset = n as i64;
    let mut counts = vec![0u32; horizon + 1];
    let mut total: u128 = 0;
    let mut mask: u64 = (1u64 << n) - 1;
    let limit: u64 = 1u64 << horizon;
    while mask < limit {
        counts.fill(0);
        let mut s: i64 = 0;
        let mut odd_levels = 0i32;
        for step in 0..horizon {
            let idx = (s + offset) as usize;
            counts[idx] += 1;
            odd_levels += if counts[idx] % 2 == 1 { 1 } else { -1 };
            s += if mask & (1 << step) != 0 { 1 } else { -1 };
        }
        if odd_levels == 0 {
            let mut product: u128 = 1;
            for &c in counts.iter() {
                if c > 0 {
                    product *= central[c as usize] as u128;
                }
            }
            total += product;
        }
        mask = next_combination(mask);
    }
    // Each bridge path has probability 2^{-2n} and the level weights carry a
    // combined factor 2^{-sum D_a} = 2^{-2n}.
    let num = BigInt::from(total);
    let den = BigInt::one() << (2 * horizon);
    Ok(BigRational::new(num, den))
}

// ---------------------------------------------------------------------------
// Exact return probability: crossing-count dynamic program
// ---------------------------------------------------------------------------

/// Pascal triangle rows `0..=max_row` in `f64`.
fn pascal_f64(max_row: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_row + 1);
    rows.push(vec![1.0]);
    for r in 1..=max_row {
        let prev = &rows[r - 1];
        let mut row = vec![0.0; r + 1];
        row[0] = 1.0;
        row[r] = 1.0;
        for j in 1..r {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

/// One-sided crossing dynamic program in `f64`.
///
/// `u[c/2][m]` is the total weight of all ways to continue the edge-crossing
/// profile above an edge crossed `c` times (all crossing counts even),
/// spending `m` further steps above it, where each level contributes its
/// excursion-arrangement factor `C(c + c' - 1, c')` and its cancellation
/// weight `C(c + c', (c+c')/2) 2^{-(c+c')}`.
fn crossing_dp_f64(horizon: usize) -> Vec<Vec<f64>> {
    let n = horizon / 2;
    let pascal = pascal_f64(horizon + 1);
    let weight = central_weight_table(horizon + 2);
    let mut u = vec![vec![0.0; horizon + 1]; n / 2 + 1];
    u[0][0] = 1.0;
    for m in 0..=horizon {
        for c in (2..=n).step_by(2) {
            let mut acc = 0.0;
            let mut cp = 0usize;
            while 2 * cp <= m {
                let rest = u[cp / 2][m - 2 * cp];
                if rest != 0.0 {
                    acc += pascal[c + cp - 1][cp] * weight[c + cp] * rest;
                }
                cp += 2;
            }
            // The c' = 0 term above uses C(c-1, 0) = 1 and closes the profile
            // with the top level's weight C(c, c/2) 2^{-c}.
            u[c / 2][m] = acc;
        }
    }
    u
}

/// Return probability of the subgroup walk after `horizon = 2n` steps via the
/// crossing-count dynamic program, `O(n^3)` in time.
///
/// The walk returns only when every edge of the driving bridge is crossed an
/// even number of steps in each direction; summing the exact bridge counts
/// for a crossing profile against the per-level cancellation weights gives
/// the same value as [`exact_return_prob`] without enumerating paths.
pub fn return_prob_dp(horizon: usize) -> Result<f64> {
    require_even_horizon("horizon", horizon)?;
    if horizon > DP_FLOAT_CAP {
        return Err(Error::invalid(
            "horizon",
            horizon,
            "at most DP_FLOAT_CAP steps for the floating-point dynamic program",
        ));
    }
    let n = horizon / 2;
    let u = crossing_dp_f64(horizon);
    let pascal = pascal_f64(horizon + 1);
    let weight = central_weight_table(horizon + 2);
    let mut total = 0.0;
    for c0 in (0..=n).step_by(2) {
        for c1 in (0..=n).step_by(2) {
            if 2 * (c0 + c1) > horizon {
                continue;
            }
            let budget = horizon - 2 * (c0 + c1);
            let arrange = pascal[c0 + c1][c0] * weight[c0 + c1];
            if arrange == 0.0 {
                continue;
            }
            for m in 0..=budget {
                let up = u[c0 / 2][m];
                if up == 0.0 {
                    continue;
                }
                let down = u[c1 / 2][budget - m];
                if down != 0.0 {
                    total += arrange * up * down;
                }
            }
        }
    }
    Ok(total * (0.5f64).powi(horizon as i32))
}

/// Exact-rational variant of [`return_prob_dp`], capped at [`DP_EXACT_CAP`]
/// steps; used to cross-validate the floating dynamic program against the
/// path enumeration.
pub fn return_prob_dp_exact(horizon: usize) -> Result<BigRational> {
    require_even_horizon("horizon", horizon)?;
    if horizon > DP_EXACT_CAP {
        return Err(Error::invalid(
            "horizon",
            horizon,
            "at most DP_EXACT_CAP steps for the exact dynamic program",
        ));
    }
    let n = horizon / 2;
    let binom = |a: usize, b: usize| BigRational::from(BigInt::from(big_binomial(a as u64, b as u64)));
    let pow_half = |e: usize| BigRational::new(BigInt::one(), BigInt::one() << e);
    let level_weight =
        |d: usize| -> BigRational { binom(d, d / 2) * pow_half(d) };
    let mut u = vec![vec![BigRational::zero(); horizon + 1]; n / 2 + 1];
    u[0][0] = BigRational::one();
    for m in 0..=horizon {
        for c in (2..=n).step_by(2) {
            let mut acc = BigRational::zero();
            let mut cp = 0usize;
            while 2 * cp <= m {
                let rest = u[cp / 2][m - 2 * cp].clone();
                if !rest.is_zero() {
                    acc += binom(c + cp - 1, cp) * level_weight(c + cp) * rest;
                }
                cp += 2;
            }
            u[c / 2][m] = acc;
        }
    }
    let mut total = BigRational::zero();
    for c0 in (0..=n).step_by(2) {
        for c1 in (0..=n).step_by(2) {
            if 2 * (c0 + c1) > horizon {
                continue;
            }
            let budget = horizon - 2 * (c0 + c1);
            let arrange = binom(c0 + c1, c0) * level_weight(c0 + c1);
            if arrange.is_zero() {
                continue;
            }
            for m in 0..=budget {
                let up = u[c0 / 2][m].clone();
                if up.is_zero() {
                    continue;
                }
                let down = u[c1 / 2][budget - m].clone();
                if !down.is_zero() {
                    total += arrange.clone() * up * down;
                }
            }
        }
    }
    Ok(total * pow_half(horizon))
}

// ---------------------------------------------------------------------------
// Rao-Blackwellized return estimators
// ---------------------------------------------------------------------------

struct RbScratch {
    counts: Vec<u32>,
    steps: Vec<i8>,
}

fn rb_weight(counts: &[u32], weight: &[f64]) -> f64 {
    let mut product = 1.0;
    for &c in counts {
        if c > 0 {
            if c % 2 == 1 {
                return 0.0;
            }
            product *= weight[c as usize];
        }
    }
    product
}

/// Rao-Blackwellized estimator of the return probability after `horizon`
/// steps: sample only the first coordinate's path and average the exact
/// conditional return probability `prod_a C(D_a, D_a/2) 2^{-D_a}` (zero
/// unless the path is a bridge with all departure counts even).
pub fn rb_return_estimator(
    horizon: usize,
    samples: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    require_even_horizon("horizon", horizon)?;
    if samples == 0 {
        return Err(Error::invalid("samples", samples, "at least one sample"));
    }
    let weight = central_weight_table(horizon);
    let offset = horizon as i64 / 2;
    let stats = parallel_mc_with(
        seed,
        samples,
        || vec![0u32; horizon + 1],
        |counts, rng| {
            counts.fill(0);
            let mut s: i64 = 0;
            for _ in 0..horizon {
                let idx = s + offset;
                if (0..=horizon as i64).contains(&idx) {
                    counts[idx as usize] += 1;
                }
                s += rng.sign() as i64;
            }
            if s != 0 {
                return 0.0;
            }
            rb_weight(counts, &weight)
        },
    );
    Ok(EstimateWithError::from_stats(&stats, seed))
}

/// Bridge-conditioned variant of [`rb_return_estimator`]: samples uniform
/// bridge paths (a shuffle of `n` up-steps and `n` down-steps), averages the
/// conditional weight, and multiplies by the exact bridge probability
/// `P[S_{2n} = 0]`.  Same mean, lower variance (the bridge indicator is
/// integrated out exactly).
pub fn rb_bridged_return_estimator(
    horizon: usize,
    samples: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    require_even_horizon("horizon", horizon)?;
    if samples == 0 {
        return Err(Error::invalid("samples", samples, "at least one sample"));
    }
    let weight = central_weight_table(horizon);
    let offset = horizon as i64 / 2;
    let bridge_prob = ln_central_binomial_prob(horizon)?.exp();
    let stats = parallel_mc_with(
        seed,
        samples,
        || {
            let mut steps = vec![1i8; horizon];
            steps[horizon / 2..].fill(-1);
            RbScratch {
                counts: vec![0u32; horizon + 1],
                steps,
            }
        },
        |scratch, rng| {
            for i in (1..horizon).rev() {
                let j = rng.index(i + 1);
                scratch.steps.swap(i, j);
            }
            scratch.counts.fill(0);
            let mut s: i64 = 0;
            for k in 0..horizon {
                // A bridge stays within |s| <= n, so the index is in range.
                scratch.counts[(s + offset) as usize] += 1;
                s += scratch.steps[k] as i64;
            }
            rb_weight(&scratch.counts, &weight)
        },
    );
    let conditional = EstimateWithError::from_stats(&stats, seed);
    Ok(EstimateWithError {
        estimate: bridge_prob * conditional.estimate,
        stderr: bridge_prob * conditional.stderr,
        samples: conditional.samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Decay-rate band
// ---------------------------------------------------------------------------

/// One horizon's contribution to a decay-rate fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayPoint {
    /// Step count `2n`.
    pub horizon: usize,
    /// Return probability at that horizon.
    pub probability: f64,
    /// Normalized decay rate `-ln p / (n^{1/3} (ln n)^{2/3})` with `n` the
    /// half-horizon.
    pub rate: f64,
}

/// Normalized decay rates over a grid of horizons, summarizing whether
/// `-ln p_{2n}` is consistent with `n^{1/3} (ln n)^{2/3}` growth.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub points: Vec<DecayPoint>,
    pub min_rate: f64,
    pub max_rate: f64,
}

impl DecayFit {
    /// Ratio of the largest to the smallest normalized rate; a value near 1
    /// means the grid is consistent with the conjectured growth order.
    pub fn band_ratio(&self) -> f64 {
        self.max_rate / self.min_rate
    }
}

/// Normalizing factor `n^{1/3} (ln n)^{2/3}` for the half-horizon `n`.
pub fn decay_normalizer(n: usize) -> f64 {
    let nf = n as f64;
    nf.cbrt() * nf.ln().powf(2.0 / 3.0)
}

/// Fit normalized decay rates to `(horizon, probability)` pairs.  Horizons
/// must be even, strictly increasing, and at least 4 (so the half-horizon
/// normalizer is positive); probabilities must lie in `(0, 1)`.
pub fn fit_decay(entries: &[(usize, f64)]) -> Result<DecayFit> {
    if entries.len() < 2 {
        return Err(Error::invalid(
            "entries",
            entries.len(),
            "at least two (horizon, probability) pairs",
        ));
    }
    let mut points = Vec::with_capacity(entries.len());
    let mut last = 0usize;
    for &(horizon, p) in entries {
        require_even_horizon("horizon", horizon)?;
        if horizon < 4 {
            return Err(Error::invalid("horizon", horizon, "at least 4 steps"));
        }
        if horizon <= last {
            return Err(Error::invalid(
                "horizon",
                horizon,
                "strictly increasing horizons",
            ));
        }
        last = horizon;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(
                "probability",
                p,
                "a return probability strictly between 0 and 1",
            ));
        }
        let n = horizon / 2;
        points.push(DecayPoint {
            horizon,
            probability: p,
            rate: -p.ln() / decay_normalizer(n),
        });
    }
    let min_rate = points.iter().map(|p| p.rate).fold(f64::INFINITY, f64::min);
    let max_rate = points
        .iter()
        .map(|p| p.rate)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        points,
        min_rate,
        max_rate,
    })
}

// ---------------------------------------------------------------------------
// Tube confinement
// ---------------------------------------------------------------------------

/// Probability that the driving walk stays in `[-halfwidth, halfwidth]` for
/// all of its first `2n` steps, with exact transfer-matrix and Monte Carlo
/// evaluations side by side.
#[derive(Debug, Clone)]
pub struct TubeProbability {
    /// Steps simulated (`2n`).
    pub horizon: usize,
    pub halfwidth: usize,
    /// Floating-point transfer-matrix value (exact up to rounding).
    pub probability: f64,
    /// Exact rational transfer-matrix value when `horizon <=`
    /// [`TUBE_EXACT_CAP`].
    pub exact: Option<BigRational>,
    /// Monte Carlo estimate of the same probability.
    pub mc: EstimateWithError,
}

fn tube_transfer_f64(horizon: usize, halfwidth: usize) -> f64 {
    let states = 2 * halfwidth + 1;
    let mut v = vec![0.0f64; states];
    let mut next = vec![0.0f64; states];
    v[halfwidth] = 1.0;
    for _ in 0..horizon {
        for (j, slot) in next.iter_mut().enumerate() {
            let from_left = if j > 0 { v[j - 1] } else { 0.0 };
            let from_right = if j + 1 < states { v[j + 1] } else { 0.0 };
            *slot = 0.5 * (from_left + from_right);
        }
        std::mem::swap(&mut v, &mut next);
    }
    v.iter().sum()
}

fn tube_transfer_exact(horizon: usize, halfwidth: usize) -> BigRational {
    let states = 2 * halfwidth + 1;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut v = vec![BigRational::zero(); states];
    v[halfwidth] = BigRational::one();
    for _ in 0..horizon {
        let mut next = vec![BigRational::zero(); states];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = BigRational::zero();
            if j > 0 {
                acc += v[j - 1].clone();
            }
            if j + 1 < states {
                acc += v[j + 1].clone();
            }
            *slot = acc * half.clone();
        }
        v = next;
    }
    let mut total = BigRational::zero();
    for x in v {
        total += x;
    }
    total
}

/// Half-width schedule `floor(m_n / ln n)` with
/// `m_n = n^{1/3} (ln n)^{2/3} / ln 2`, the confinement scale at which the
/// tube cost matches the cancellation gain.
pub fn tube_halfwidth(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::invalid("n", n, "at least 2 for a positive ln n"));
    }
    let m = decay_normalizer(n) / std::f64::consts::LN_2;
    Ok((m / (n as f64).ln()).floor() as usize)
}

/// Probability that the walk stays inside the tube `[-halfwidth, halfwidth]`
/// for its first `2n` steps (`horizon = 2n`).  Evaluates the absorbing
/// transfer matrix in floating point (and exactly for `horizon <=`
/// [`TUBE_EXACT_CAP`]) and cross-checks with a Monte Carlo estimate.
pub fn tube_probability(
    horizon: usize,
    halfwidth: usize,
    samples: u64,
    seed: u64,
) -> Result<TubeProbability> {
    require_even_horizon("horizon", horizon)?;
    if samples == 0 {
        return Err(Error::invalid("samples", samples, "at least one sample"));
    }
    let probability = tube_transfer_f64(horizon, halfwidth);
    let exact = (horizon <= TUBE_EXACT_CAP).then(|| tube_transfer_exact(horizon, halfwidth));
    let h = halfwidth as i64;
    let stats = parallel_mc_with(
        seed,
        samples,
        || (),
        |(), rng| {
            let mut s: i64 = 0;
            for _ in 0..horizon {
                s += rng.sign() as i64;
                if s.abs() > h {
                    return 0.0;
                }
            }
            1.0
        },
    );
    Ok(TubeProbability {
        horizon,
        halfwidth,
        probability,
        exact,
        mc: EstimateWithError::from_stats(&stats, seed),
    })
}
