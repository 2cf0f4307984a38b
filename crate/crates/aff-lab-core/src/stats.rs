//! Streaming statistics and the deterministic parallel reduction used by all
//! Monte Carlo estimators.
//!
//! Work is split over a fixed number of RNG streams (not over threads), and
//! per-stream partials are merged in stream order, so the final result is
//! bit-identical no matter how many workers execute the streams.

use crate::rng::StreamRng;
use rayon::prelude::*;

/// Number of RNG streams a batch is partitioned into. Fixed (rather than
/// tied to the worker count) so estimates do not depend on parallelism.
pub const DEFAULT_STREAMS: u64 = 256;

/// Kahan compensated accumulator for sums whose terms span many orders
/// of magnitude.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Welford accumulator for mean and variance, mergeable across streams.
#[derive(Clone, Copy, Debug)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for RunningStats {
    fn default() -> Self {
        RunningStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Pooled combination of two accumulators (parallel Welford update).
    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }
    pub fn mean(&self) -> f64 {
        self.mean
    }
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }
    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.sample_variance() / self.count as f64).sqrt()
    }
    pub fn min(&self) -> f64 {
        self.min
    }
    pub fn max(&self) -> f64 {
        self.max
    }
}

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithError {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateWithError {
    pub fn from_stats(stats: &RunningStats, seed: u64) -> Self {
        EstimateWithError {
            estimate: stats.mean(),
            stderr: stats.stderr(),
            samples: stats.count(),
            seed,
        }
    }

    /// Absolute deviation of `estimate` from `target` in stderr units.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.estimate == target {
                return 0.0;
            }
            return f64::INFINITY;
        }
        (self.estimate - target).abs() / self.stderr
    }
}

/// Run `per_stream` once for each stream id and return the results in
/// stream order. Streams execute in parallel; ordering of the returned
/// vector (and hence of any subsequent fold) is deterministic.
pub fn stream_reduce<A, F>(master_seed: u64, streams: u64, per_stream: F) -> Vec<A>
where
    A: Send,
    F: Fn(u64, &mut StreamRng) -> A + Sync,
{
    (0..streams)
        .into_par_iter()
        .map(|stream_id| {
            let mut rng = StreamRng::new(master_seed, stream_id);
            per_stream(stream_id, &mut rng)
        })
        .collect()
}

/// Split `total` samples as evenly as possible over `streams` chunks.
pub fn samples_for_stream(total: u64, streams: u64, stream_id: u64) -> u64 {
    let base = total / streams;
    let extra = total % streams;
    base + u64::from(stream_id < extra)
}

/// Monte Carlo mean of `sample` over `samples` draws partitioned across
/// `DEFAULT_STREAMS` deterministic streams.
pub fn parallel_mc<F>(master_seed: u64, samples: u64, sample: F) -> RunningStats
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    parallel_mc_with(master_seed, samples, || (), |(), rng| sample(rng))
}

/// Like [`parallel_mc`], but gives each stream a scratch value built by
/// `init` (lookup tables, reusable buffers) that `sample` may mutate.
pub fn parallel_mc_with<S, I, F>(master_seed: u64, samples: u64, init: I, sample: F) -> RunningStats
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut StreamRng) -> f64 + Sync,
{
    let streams = DEFAULT_STREAMS.min(samples.max(1));
    let partials = stream_reduce(master_seed, streams, |stream_id, rng| {
        let mut scratch = init();
        let mut stats = RunningStats::default();
        for _ in 0..samples_for_stream(samples, streams, stream_id) {
            stats.push(sample(&mut scratch, rng));
        }
        stats
    });
    let mut total = RunningStats::default();
    for p in &partials {
        total.merge(p);
    }
    total
}
