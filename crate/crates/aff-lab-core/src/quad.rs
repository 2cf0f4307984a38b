//! One-dimensional quadrature.
//!
//! The workhorse is a 21-point Gauss–Kronrod rule inside a global-adaptive
//! driver (bisect the segment with the largest error estimate until the sum
//! of estimates meets the tolerance). A Gauss–Legendre rule with runtime
//! node computation is provided for smooth integrands on fixed grids, where
//! adaptivity would be wasted.

use crate::{Error, Result};
use std::collections::BinaryHeap;

/// Kronrod abscissae for the 21-point rule (positive half, descending).
#[rustfmt::skip]
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the embedded 10-point Gauss rule (matching odd Kronrod nodes).
#[rustfmt::skip]
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Kronrod weights for the 21-point rule.
#[rustfmt::skip]
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Budget on adaptive subdivisions before giving up.
    pub max_segments: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_segments: 2048,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative estimate of the absolute quadrature error.
    pub error: f64,
    pub evaluations: usize,
}

/// QUADPACK-style error rescaling: sharpen the raw |K − G| difference by the
/// observed smoothness, floored at the round-off level of the integral.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    err
}

/// Apply the 21-point Gauss–Kronrod rule on `[a, b]`.
/// Returns `(value, error_estimate)`.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let mut kronrod = f_center * WGK21[10];
    let mut gauss = 0.0;
    let mut result_abs = kronrod.abs();

    for j in 0..10 {
        let x = half * XGK21[j];
        let v1 = f(center - x);
        let v2 = f(center + x);
        fv1[j] = v1;
        fv2[j] = v2;
        let sum = v1 + v2;
        kronrod += WGK21[j] * sum;
        result_abs += WGK21[j] * (v1.abs() + v2.abs());
        if j % 2 == 1 {
            gauss += WG10[j / 2] * sum;
        }
    }

    let mean = kronrod * 0.5;
    let mut result_asc = WGK21[10] * (f_center - mean).abs();
    for j in 0..10 {
        result_asc += WGK21[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let err = rescale_error((kronrod - gauss) * half, result_abs * half.abs(), result_asc * half.abs());
    (value, err)
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` on the finite interval `[a, b]`.
///
/// Fails with the achieved error estimate when the subdivision budget is
/// exhausted before the tolerance `max(abs_tol, rel_tol·|I|)` is met.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<QuadResult> {
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut evaluations = 21;

    loop {
        let total_value: f64 = heap.iter().map(|s| s.value).sum();
        let total_error: f64 = heap.iter().map(|s| s.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total_value.abs());
        if total_error <= tol {
            return Ok(QuadResult {
                value: total_value,
                error: total_error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_segments {
            return Err(Error::QuadratureAccuracy {
                value: total_value,
                error: total_error,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot refine further.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk21(&f, lo, hi);
            evaluations += 21;
            heap.push(Segment { a: lo, b: hi, value, error });
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let (mut p, mut dp) = legendre_with_derivative(n, x);
        for _ in 0..100 {
            let dx = -p / dp;
            x += dx;
            let next = legendre_with_derivative(n, x);
            p = next.0;
            dp = next.1;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed-order Gauss–Legendre integration of `f` on `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        sum += w * f(center + half * x);
    }
    sum * half
}
