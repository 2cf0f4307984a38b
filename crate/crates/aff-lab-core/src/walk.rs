//! Random-walk samplers on the affine group's subgroup lattice.
//!
//! A path is driven by sign innovations `X_k` (always ±1, so the log-scale
//! component `S_k` lives on the integers) and translation innovations `Y_k`
//! (±1 or standard Gaussian). The group coordinates are recovered as
//! `a_k = e^{ε S_k}` and `b_k = ε Σ_{j≤k} Y_j e^{ε S_{j−1}}`.
//!
//! Bridge paths — walks conditioned to return to 0 — are drawn exactly by
//! shuffling a multiset of `n/2` up-steps and `n/2` down-steps, rather than
//! by rejection.

use crate::rng::StreamRng;
use crate::stats::KahanSum;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Distribution of one innovation sequence: symmetric, unit variance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnovationKind {
    Bernoulli,
    Gaussian,
}

/// Innovation distributions for the two coordinates.
///
/// The scale innovations are required to be Bernoulli so that `S_k` stays on
/// the integer lattice (every lattice-side computation — local times, exact
/// return probabilities — relies on this); the translation innovations may
/// be Bernoulli or Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InnovationSpec {
    x: InnovationKind,
    y: InnovationKind,
}

impl InnovationSpec {
    pub fn new(x: InnovationKind, y: InnovationKind) -> Result<Self> {
        if x != InnovationKind::Bernoulli {
            return Err(Error::invalid(
                "x innovations",
                format!("{x:?}"),
                "must be Bernoulli so the scale component stays on the lattice",
            ));
        }
        Ok(InnovationSpec { x, y })
    }

    /// Bernoulli signs for both coordinates.
    pub fn bernoulli() -> Self {
        InnovationSpec {
            x: InnovationKind::Bernoulli,
            y: InnovationKind::Bernoulli,
        }
    }

    /// Bernoulli signs for the scale, standard Gaussians for the translation.
    pub fn mixed() -> Self {
        InnovationSpec {
            x: InnovationKind::Bernoulli,
            y: InnovationKind::Gaussian,
        }
    }

    pub fn x(&self) -> InnovationKind {
        self.x
    }
    pub fn y(&self) -> InnovationKind {
        self.y
    }
}

/// A realized walk path.
///
/// `s[k] = S_k` with `S_0 = 0`; `b_terms[k] = b_k = ε Σ_{j≤k} Y_j e^{ε S_{j−1}}`
/// (compensated summation). Bridge paths carry only the sign component:
/// `ys` and `b_terms` are empty and `epsilon` is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkPath {
    pub epsilon: f64,
    pub n: usize,
    pub s: Vec<i64>,
    pub b_terms: Vec<f64>,
    pub ys: Vec<f64>,
    pub seed: u64,
}

impl WalkPath {
    /// Build a path from explicit innovations (primarily for hand-checked
    /// examples and replay).
    pub fn from_innovations(epsilon: f64, xs: &[i8], ys: &[f64], seed: u64) -> Result<WalkPath> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(
                "innovations",
                format!("{} x vs {} y", xs.len(), ys.len()),
                "must have equal length",
            ));
        }
        if xs.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::invalid("x innovations", "non-sign value", "must be ±1"));
        }
        let n = xs.len();
        let mut s = Vec::with_capacity(n + 1);
        let mut b_terms = Vec::with_capacity(n + 1);
        s.push(0i64);
        b_terms.push(0.0);
        let mut b = KahanSum::default();
        for k in 0..n {
            let prev = s[k];
            b.add(epsilon * ys[k] * (epsilon * prev as f64).exp());
            s.push(prev + xs[k] as i64);
            b_terms.push(b.value());
        }
        Ok(WalkPath {
            epsilon,
            n,
            s,
            b_terms,
            ys: ys.to_vec(),
            seed,
        })
    }

    /// `S_n`.
    pub fn endpoint(&self) -> i64 {
        *self.s.last().expect("path always holds S_0")
    }

    /// `b_n` (0 for bridge paths, which carry no translation part).
    pub fn b_n(&self) -> f64 {
        self.b_terms.last().copied().unwrap_or(0.0)
    }

    /// `a_k = e^{ε S_k}`.
    pub fn a_at(&self, k: usize) -> f64 {
        (self.epsilon * self.s[k] as f64).exp()
    }

    pub fn max_level(&self) -> i64 {
        *self.s.iter().max().expect("nonempty")
    }

    pub fn min_level(&self) -> i64 {
        *self.s.iter().min().expect("nonempty")
    }
}

fn draw_y(kind: InnovationKind, rng: &mut StreamRng) -> f64 {
    match kind {
        InnovationKind::Bernoulli => rng.sign() as f64,
        InnovationKind::Gaussian => rng.standard_normal(),
    }
}

/// Sample a free walk of `n` steps; `seed` labels the path and seeds stream 0.
pub fn simulate_walk(n: usize, epsilon: f64, spec: &InnovationSpec, seed: u64) -> Result<WalkPath> {
    let mut rng = StreamRng::new(seed, 0);
    simulate_walk_with(n, epsilon, spec, &mut rng, seed)
}

/// Sample a free walk from a caller-managed stream (batch use).
pub fn simulate_walk_with(
    n: usize,
    epsilon: f64,
    spec: &InnovationSpec,
    rng: &mut StreamRng,
    seed_label: u64,
) -> Result<WalkPath> {
    if n == 0 {
        return Err(Error::invalid("n", n, "must be at least 1"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", epsilon, "must be positive and finite"));
    }
    let mut s = Vec::with_capacity(n + 1);
    let mut b_terms = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n);
    s.push(0i64);
    b_terms.push(0.0);
    let mut b = KahanSum::default();
    for k in 0..n {
        let x = rng.sign() as i64;
        let y = draw_y(spec.y, rng);
        let prev = s[k];
        b.add(epsilon * y * (epsilon * prev as f64).exp());
        s.push(prev + x);
        b_terms.push(b.value());
        ys.push(y);
    }
    Ok(WalkPath {
        epsilon,
        n,
        s,
        b_terms,
        ys,
        seed: seed_label,
    })
}

/// Sample a walk conditioned on `S_n = 0` by a Fisher–Yates shuffle of the
/// multiset of `n/2` up-steps and `n/2` down-steps (exact conditional law).
pub fn simulate_bridge_walk(n: usize, seed: u64) -> Result<WalkPath> {
    let mut rng = StreamRng::new(seed, 0);
    simulate_bridge_walk_with(n, &mut rng, seed)
}

/// Bridge walk from a caller-managed stream (batch use).
pub fn simulate_bridge_walk_with(n: usize, rng: &mut StreamRng, seed_label: u64) -> Result<WalkPath> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid("n", n, "must be even and positive"));
    }
    let mut steps: Vec<i8> = Vec::with_capacity(n);
    steps.resize(n / 2, 1);
    steps.resize(n, -1);
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        steps.swap(i, j);
    }
    let mut s = Vec::with_capacity(n + 1);
    s.push(0i64);
    for k in 0..n {
        s.push(s[k] + steps[k] as i64);
    }
    Ok(WalkPath {
        epsilon: 0.0,
        n,
        s,
        b_terms: Vec::new(),
        ys: Vec::new(),
        seed: seed_label,
    })
}

/// Number of walk steps matching duration `t` at step size `ε`: `⌊t/ε²⌋`.
/// A tiny relative guard absorbs division artifacts on exact ratios.
pub fn donsker_scale(t: f64, epsilon: f64) -> Result<usize> {
    if !(t > 0.0) || !(epsilon > 0.0) {
        return Err(Error::invalid(
            "(t, epsilon)",
            format!("({t}, {epsilon})"),
            "must both be positive",
        ));
    }
    let q = t / (epsilon * epsilon);
    Ok((q + q * 1e-12 + 1e-12).floor() as usize)
}

/// Local times and departure counts of a path, level by level.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTimeProfile {
    /// `L(n,a) = #{k : S_k = a, 0 < k ≤ n}`.
    pub visits: BTreeMap<i64, u64>,
    /// `D(n,a) = #{k ∈ [1,n] : S_{k−1} = a}` (times departing from `a`).
    pub departures: BTreeMap<i64, u64>,
    /// `Σ_{k: S_{k−1}=a} Y_k` per level (empty when the path has no `ys`).
    pub y_level_sums: BTreeMap<i64, f64>,
    /// Minimum of `S_k` over `0 ≤ k ≤ n` (≤ 0 since `S_0 = 0`).
    pub min_level: i64,
    /// Maximum of `S_k` over `0 ≤ k ≤ n` (≥ 0 since `S_0 = 0`).
    pub max_level: i64,
}

/// Tally visits, departures, and per-level innovation sums of a path.
pub fn local_time_profile(path: &WalkPath) -> LocalTimeProfile {
    let mut visits = BTreeMap::new();
    let mut departures = BTreeMap::new();
    let mut y_level_sums = BTreeMap::new();
    for k in 1..=path.n {
        *visits.entry(path.s[k]).or_insert(0u64) += 1;
        let from = path.s[k - 1];
        *departures.entry(from).or_insert(0u64) += 1;
        if !path.ys.is_empty() {
            *y_level_sums.entry(from).or_insert(0.0) += path.ys[k - 1];
        }
    }
    LocalTimeProfile {
        visits,
        departures,
        y_level_sums,
        min_level: path.min_level(),
        max_level: path.max_level(),
    }
}

impl LocalTimeProfile {
    /// Recompute `b_n` from the occupation decomposition
    /// `b_n = ε Σ_a (Σ_{k: S_{k−1}=a} Y_k) e^{εa}`.
    pub fn reconstruct_b(&self, epsilon: f64) -> f64 {
        let mut sum = KahanSum::default();
        for (&level, &ysum) in &self.y_level_sums {
            sum.add(epsilon * ysum * (epsilon * level as f64).exp());
        }
        sum.value()
    }
}

/// A realized discretized exponential functional of a Brownian bridge.
#[derive(Clone, Copy, Debug)]
pub struct BridgeFunctional {
    pub t: f64,
    pub m: usize,
    /// `Ã(t) ≈ t·(1/m) Σ_j exp(2√t b_{u_j})`.
    pub value: f64,
    pub min_bridge: f64,
    pub max_bridge: f64,
}

/// Quadrature convention for the time grid of the bridge functional.
///
/// Both conventions coincide here because the bridge is pinned to 0 at both
/// endpoints, making the first and last integrand values equal; the left
/// rule mirrors the discrete-walk sum `Σ_j e^{2ε S_{j−1}}` structurally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GridRule {
    #[default]
    LeftEndpoint,
    Trapezoid,
}

/// Simulate a standard Brownian bridge on a uniform `m`-grid and return the
/// discretized functional `Ã(t) = t ∫_0^1 exp(2√t b_u) du`.
pub fn sample_bridge_functional(
    t: f64,
    m: usize,
    rule: GridRule,
    rng: &mut StreamRng,
) -> Result<BridgeFunctional> {
    if m < 2 {
        return Err(Error::invalid("m", m, "grid must have at least 2 cells"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be positive and finite"));
    }
    // Free-motion prefix sums, then pin: b_{j/m} = B_j − (j/m) B_m.
    let scale = (1.0 / m as f64).sqrt();
    let mut free = Vec::with_capacity(m + 1);
    free.push(0.0);
    let mut acc = KahanSum::default();
    for _ in 0..m {
        acc.add(scale * rng.standard_normal());
        free.push(acc.value());
    }
    let drift = free[m] / m as f64;
    let bridge_at = |j: usize| free[j] - drift * j as f64;

    let two_sqrt_t = 2.0 * t.sqrt();
    let mut sum = KahanSum::default();
    let mut min_b = 0.0f64;
    let mut max_b = 0.0f64;
    for j in 0..=m {
        let b = bridge_at(j);
        min_b = min_b.min(b);
        max_b = max_b.max(b);
        let weight = match rule {
            GridRule::LeftEndpoint => {
                if j < m {
                    1.0
                } else {
                    0.0
                }
            }
            GridRule::Trapezoid => {
                if j == 0 || j == m {
                    0.5
                } else {
                    1.0
                }
            }
        };
        if weight > 0.0 {
            sum.add(weight * (two_sqrt_t * b).exp());
        }
    }
    Ok(BridgeFunctional {
        t,
        m,
        value: t * sum.value() / m as f64,
        min_bridge: min_b,
        max_bridge: max_b,
    })
}

/// Draw a bridge walk of `n` steps and return the discrete functional
/// `Ã_n(t) = ε_n² Σ_{j=1}^n exp(2 ε_n S̃_{j−1})` with `ε_n = √(t/n)`.
pub fn walk_bridge_functional(t: f64, n: usize, rng: &mut StreamRng) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", t, "must be positive and finite"));
    }
    let path = simulate_bridge_walk_with(n, rng, 0)?;
    let eps = (t / n as f64).sqrt();
    let mut sum = KahanSum::default();
    for j in 1..=n {
        sum.add((2.0 * eps * path.s[j - 1] as f64).exp());
    }
    Ok(eps * eps * sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{self, QuadratureOptions};
    use crate::stats::{parallel_mc, RunningStats};
    use approx::assert_relative_eq;

    #[test]
    fn spec_rejects_gaussian_scale_innovations() {
        assert!(InnovationSpec::new(InnovationKind::Gaussian, InnovationKind::Bernoulli).is_err());
        assert!(InnovationSpec::new(InnovationKind::Bernoulli, InnovationKind::Gaussian).is_ok());
    }

    #[test]
    fn one_step_hand_values() {
        let eps = 0.3;
        let path = WalkPath::from_innovations(eps, &[1], &[1.0], 0).unwrap();
        assert_eq!(path.s, vec![0, 1]);
        assert_relative_eq!(path.a_at(1), eps.exp(), max_relative = 1e-15);
        assert_relative_eq!(path.b_n(), eps, max_relative = 1e-15);
    }

    #[test]
    fn two_step_hand_values() {
        // X = (+1, −1), Y = (+1, −1): b₂ = ε(1 − e^ε), a₂ = 1.
        let eps = 0.25;
        let path = WalkPath::from_innovations(eps, &[1, -1], &[1.0, -1.0], 0).unwrap();
        assert_eq!(path.endpoint(), 0);
        assert_relative_eq!(path.a_at(2), 1.0, max_relative = 1e-15);
        assert_relative_eq!(path.b_n(), eps * (1.0 - eps.exp()), max_relative = 1e-14);
    }

    #[test]
    fn walk_is_reproducible_and_streams_differ() {
        let spec = InnovationSpec::mixed();
        let a = simulate_walk(64, 0.1, &spec, 99).unwrap();
        let b = simulate_walk(64, 0.1, &spec, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_walk(64, 0.1, &spec, 100).unwrap();
        assert_ne!(a.s, c.s);
    }

    #[test]
    fn endpoint_mean_is_centered() {
        let spec = InnovationSpec::bernoulli();
        let n = 1024;
        let stats = parallel_mc(5, 20_000, |rng| {
            let path = simulate_walk_with(n, 0.05, &spec, rng, 0).unwrap();
            path.endpoint() as f64 / (n as f64).sqrt()
        });
        assert!(
            stats.mean().abs() < 3.0 * stats.stderr().max(1.0 / (stats.count() as f64).sqrt()),
            "mean={} stderr={}",
            stats.mean(),
            stats.stderr()
        );
    }

    #[test]
    fn bridge_requires_even_positive_length() {
        assert!(simulate_bridge_walk(3, 0).is_err());
        assert!(simulate_bridge_walk(0, 0).is_err());
        assert!(simulate_bridge_walk(4, 0).is_ok());
    }

    #[test]
    fn bridge_always_returns_to_zero() {
        let mut rng = StreamRng::new(11, 0);
        for n in [2usize, 4, 10, 64] {
            for _ in 0..50 {
                let path = simulate_bridge_walk_with(n, &mut rng, 0).unwrap();
                assert_eq!(path.endpoint(), 0);
                assert_eq!(path.s.len(), n + 1);
            }
        }
    }

    #[test]
    fn two_step_bridge_frequencies() {
        let mut rng = StreamRng::new(3, 0);
        let samples = 100_000;
        let mut ups = 0u64;
        for _ in 0..samples {
            let path = simulate_bridge_walk_with(2, &mut rng, 0).unwrap();
            if path.s[1] == 1 {
                ups += 1;
            }
        }
        let p = ups as f64 / samples as f64;
        let sigma = (0.25f64 / samples as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "p={p}");
    }

    /// Exhaustively enumerate all bridges of length `n` (bitmask over up
    /// positions) and their maxima.
    fn enumerate_bridge_maxima(n: usize) -> BTreeMap<i64, u64> {
        let mut counts = BTreeMap::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n / 2 {
                continue;
            }
            let mut s = 0i64;
            let mut max = 0i64;
            for k in 0..n {
                s += if mask >> k & 1 == 1 { 1 } else { -1 };
                max = max.max(s);
            }
            *counts.entry(max).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn bridge_max_distribution_matches_enumeration() {
        let n = 8;
        let exact = enumerate_bridge_maxima(n);
        let total_paths: u64 = exact.values().sum();
        assert_eq!(total_paths, 70);

        let samples = 100_000u64;
        let mut rng = StreamRng::new(17, 0);
        let mut observed: BTreeMap<i64, u64> = BTreeMap::new();
        for _ in 0..samples {
            let path = simulate_bridge_walk_with(n, &mut rng, 0).unwrap();
            *observed.entry(path.max_level()).or_insert(0) += 1;
        }
        for (&max, &count) in &exact {
            let p = count as f64 / total_paths as f64;
            let p_hat = observed.get(&max).copied().unwrap_or(0) as f64 / samples as f64;
            let sigma = (p * (1.0 - p) / samples as f64).sqrt();
            assert!(
                (p_hat - p).abs() < 3.5 * sigma,
                "max={max}: p={p} p_hat={p_hat}"
            );
        }
    }

    /// Chi-square uniformity over all bridge arrangements of length `n`.
    fn bridge_chi_square(n: usize, samples: u64, seed: u64) -> (f64, usize) {
        let mut rng = StreamRng::new(seed, 0);
        let classes = 1usize << n;
        let mut counts = vec![0u64; classes];
        for _ in 0..samples {
            let path = simulate_bridge_walk_with(n, &mut rng, 0).unwrap();
            let mut key = 0usize;
            for k in 0..n {
                if path.s[k + 1] > path.s[k] {
                    key |= 1 << k;
                }
            }
            counts[key] += 1;
        }
        let valid: Vec<u64> = (0..classes)
            .filter(|key| key.count_ones() as usize == n / 2)
            .map(|key| counts[key])
            .collect();
        let expected = samples as f64 / valid.len() as f64;
        let chi2 = valid
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        // All samples must land in valid classes.
        assert_eq!(valid.iter().sum::<u64>(), samples);
        (chi2, valid.len() - 1)
    }

    #[test]
    fn bridge_uniformity_chi_square() {
        // p = 0.001 critical values: df=5 → 20.515, df=19 → 43.820.
        let (chi2, df) = bridge_chi_square(4, 1_000_000, 7);
        assert_eq!(df, 5);
        assert!(chi2 < 20.515, "chi2={chi2}");
        let (chi2, df) = bridge_chi_square(6, 1_000_000, 7);
        assert_eq!(df, 19);
        assert!(chi2 < 43.820, "chi2={chi2}");
    }

    #[test]
    fn donsker_scale_examples() {
        assert_eq!(donsker_scale(1.0, 0.1).unwrap(), 100);
        assert_eq!(donsker_scale(1.0, 1.0).unwrap(), 1);
        assert_eq!(donsker_scale(0.5, 0.1).unwrap(), 50);
        assert_eq!(donsker_scale(1.0, 0.3).unwrap(), 11);
        assert!(donsker_scale(0.0, 0.1).is_err());
    }

    #[test]
    fn local_time_hand_example() {
        // Path (+, −): visits level 1 at time 1 and level 0 at time 2.
        let path = WalkPath::from_innovations(0.1, &[1, -1], &[1.0, 1.0], 0).unwrap();
        let profile = local_time_profile(&path);
        assert_eq!(profile.visits.get(&0), Some(&1));
        assert_eq!(profile.visits.get(&1), Some(&1));
        assert_eq!(profile.departures.get(&0), Some(&1));
        assert_eq!(profile.departures.get(&1), Some(&1));
        assert_eq!((profile.min_level, profile.max_level), (0, 1));
    }

    #[test]
    fn visits_sum_to_path_length() {
        let mut rng = StreamRng::new(23, 0);
        let spec = InnovationSpec::bernoulli();
        for _ in 0..200 {
            let path = simulate_walk_with(257, 0.2, &spec, &mut rng, 0).unwrap();
            let profile = local_time_profile(&path);
            let visit_total: u64 = profile.visits.values().sum();
            let departure_total: u64 = profile.departures.values().sum();
            assert_eq!(visit_total, 257);
            assert_eq!(departure_total, 257);
            assert!(profile.min_level <= 0 && profile.max_level >= 0);
        }
    }

    #[test]
    fn occupation_identity_reconstructs_b() {
        let mut rng = StreamRng::new(29, 0);
        for (spec, eps, n) in [
            (InnovationSpec::bernoulli(), 0.05, 1000),
            (InnovationSpec::mixed(), 0.3, 500),
            (InnovationSpec::bernoulli(), 1.5, 64),
        ] {
            for _ in 0..333 {
                let path = simulate_walk_with(n, eps, &spec, &mut rng, 0).unwrap();
                let profile = local_time_profile(&path);
                let rebuilt = profile.reconstruct_b(eps);
                // The sum cancels heavily, so "relative" is measured against
                // the magnitude of the terms, not of the (near-zero) result.
                let term_scale: f64 = profile
                    .y_level_sums
                    .iter()
                    .map(|(&a, &ysum)| (eps * ysum * (eps * a as f64).exp()).abs())
                    .sum();
                let tolerance = 1e-12 * term_scale.max(path.b_n().abs());
                assert!(
                    (rebuilt - path.b_n()).abs() <= tolerance,
                    "rebuilt={rebuilt} b_n={} scale={term_scale}",
                    path.b_n()
                );
            }
        }
    }

    #[test]
    fn bridge_functional_short_time_limit() {
        let mut rng = StreamRng::new(31, 0);
        let f = sample_bridge_functional(1e-6, 256, GridRule::LeftEndpoint, &mut rng).unwrap();
        assert!((f.value / f.t - 1.0).abs() < 1e-3, "ratio={}", f.value / f.t);
    }

    #[test]
    fn bridge_functional_conventions_coincide_on_pinned_paths() {
        // Both endpoint values are exp(0), so left and trapezoid agree.
        let mut a = StreamRng::new(37, 0);
        let mut b = StreamRng::new(37, 0);
        let left = sample_bridge_functional(2.0, 128, GridRule::LeftEndpoint, &mut a).unwrap();
        let trap = sample_bridge_functional(2.0, 128, GridRule::Trapezoid, &mut b).unwrap();
        assert_relative_eq!(left.value, trap.value, max_relative = 1e-13);
    }

    #[test]
    fn bridge_functional_respects_pointwise_lower_bound() {
        let mut rng = StreamRng::new(41, 0);
        for _ in 0..100 {
            let f = sample_bridge_functional(4.0, 64, GridRule::LeftEndpoint, &mut rng).unwrap();
            assert!(f.value >= f.t * (2.0 * f.t.sqrt() * f.min_bridge).exp() * (1.0 - 1e-12));
            assert!(f.value > 0.0);
        }
    }

    #[test]
    fn bridge_functional_mean_matches_quadrature_oracle() {
        // E[exp(2√t b_u)] = e^{2t·u(1−u)}, so E[Ã(t)] = t ∫_0^1 e^{2t·u(1−u)} du.
        let t = 1.0;
        let oracle = quad::integrate(
            |u| (2.0 * t * u * (1.0 - u)).exp(),
            0.0,
            1.0,
            &QuadratureOptions::default(),
        )
        .unwrap()
        .value
            * t;
        let stats = parallel_mc(43, 20_000, |rng| {
            sample_bridge_functional(t, 2048, GridRule::LeftEndpoint, rng)
                .unwrap()
                .value
        });
        let dev = (stats.mean() - oracle).abs();
        assert!(
            dev < 4.0 * stats.stderr() + 0.003 * oracle,
            "mean={} oracle={oracle} stderr={}",
            stats.mean(),
            stats.stderr()
        );
    }

    #[test]
    fn walk_functional_two_step_values() {
        // Both two-step bridges: Ã₂(t) = (t/2)(1 + e^{±2√(t/2)}).
        let t = 3.0;
        let eps = (t / 2.0f64).sqrt();
        let hi = t / 2.0 * (1.0 + (2.0 * eps).exp());
        let lo = t / 2.0 * (1.0 + (-2.0 * eps).exp());
        let mut rng = StreamRng::new(47, 0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..64 {
            let v = walk_bridge_functional(t, 2, &mut rng).unwrap();
            let is_hi = (v - hi).abs() < 1e-12 * hi;
            let is_lo = (v - lo).abs() < 1e-12 * hi;
            assert!(is_hi || is_lo, "unexpected value {v}");
            seen.insert(is_hi);
        }
        assert_eq!(seen.len(), 2, "both branches should occur in 64 draws");
    }

    #[test]
    fn walk_functional_inverse_mean_near_inverse_time() {
        // Continuum identity: E[Ã(t)^{−1}] = 1/t.
        let t = 4.0;
        let stats = parallel_mc(53, 20_000, |rng| {
            1.0 / walk_bridge_functional(t, 2048, rng).unwrap()
        });
        assert!(
            (stats.mean() - 1.0 / t).abs() < 0.2 / t,
            "mean={}",
            stats.mean()
        );
    }

    #[test]
    fn conditioned_max_moment_stable_in_path_length() {
        // Exponential moments of the scaled conditioned maximum stay bounded
        // as n grows: ratio between n=1024 and n=64 estimates ≤ 1.2.
        let thetas = [0.5, 1.0, 2.0];
        let estimate = |n: usize| -> Vec<f64> {
            let mut totals = vec![RunningStats::default(); thetas.len()];
            let mut rng = StreamRng::new(59, 0);
            for _ in 0..20_000 {
                let path = simulate_bridge_walk_with(n, &mut rng, 0).unwrap();
                let scaled = path.max_level() as f64 / (n as f64).sqrt();
                for (i, &theta) in thetas.iter().enumerate() {
                    totals[i].push((theta * scaled).exp());
                }
            }
            totals.iter().map(|s| s.mean()).collect()
        };
        let at_64 = estimate(64);
        let at_1024 = estimate(1024);
        for i in 0..thetas.len() {
            let ratio = at_1024[i] / at_64[i];
            assert!(
                ratio <= 1.2,
                "theta={}: ratio={ratio} ({} vs {})",
                thetas[i],
                at_1024[i],
                at_64[i]
            );
        }
    }
}
