//! Experiment configuration: one human-editable TOML file covering every
//! experiment, with defaults matching the acceptance instances.  The parsed
//! structure round-trips losslessly through serialization, and its canonical
//! serialization is hashed into every output file for provenance.

use aff_lab_core::estimators::QuasiLocalConfig;
use aff_lab_core::toy::ToyModel;
use num::rational::Rational64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    /// Master seed; every estimator derives its streams from this.
    pub seed: u64,
    /// Worker threads; 0 uses the library default pool.
    pub workers: usize,
    pub kernel: KernelSection,
    pub diag_asymptote: DiagAsymptoteSection,
    pub kernel_consistency: KernelConsistencySection,
    pub walk: WalkSection,
    pub return_probs: ReturnSection,
    pub local_time: LocalTimeSection,
    pub tube: TubeSection,
    pub decay: DecaySection,
    pub quasi_local: QuasiLocalSection,
    pub p2: P2Section,
    pub mixed_llt: MixedLltSection,
    pub neg_moment: NegMomentSection,
    pub cond_max: CondMaxSection,
    pub toy: ToySection,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seed: 2026,
            workers: 0,
            kernel: KernelSection::default(),
            diag_asymptote: DiagAsymptoteSection::default(),
            kernel_consistency: KernelConsistencySection::default(),
            walk: WalkSection::default(),
            return_probs: ReturnSection::default(),
            local_time: LocalTimeSection::default(),
            tube: TubeSection::default(),
            decay: DecaySection::default(),
            quasi_local: QuasiLocalSection::default(),
            p2: P2Section::default(),
            mixed_llt: MixedLltSection::default(),
            neg_moment: NegMomentSection::default(),
            cond_max: CondMaxSection::default(),
            toy: ToySection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub t_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            t_grid: vec![0.5, 1.0, 4.0, 16.0],
            r_grid: vec![0.0, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagAsymptoteSection {
    pub t_grid: Vec<f64>,
}

impl Default for DiagAsymptoteSection {
    fn default() -> Self {
        Self {
            t_grid: vec![10.0, 50.0, 100.0, 200.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConsistencySection {
    /// Times at which the hyperbolic kernel's total mass is checked.
    pub normalization_t: Vec<f64>,
    /// Semigroup residual parameters: `p(s) ∘ p(t)` vs `p(s+t)` at radius `r0`.
    pub ck_s: f64,
    pub ck_t: f64,
    pub ck_r0: f64,
}

impl Default for KernelConsistencySection {
    fn default() -> Self {
        Self {
            normalization_t: vec![0.5, 1.0, 4.0],
            ck_s: 0.5,
            ck_t: 0.5,
            ck_r0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSection {
    /// Continuum time; the step size is `ε = (t/n)^{1/2}`.
    pub t: f64,
    /// Steps in the dumped path.
    pub n: usize,
    /// Samples for the batch statistic (mean bridge functional).
    pub samples: u64,
    /// Sub-intervals of the bridge-functional grid.
    pub m: usize,
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            t: 4.0,
            n: 64,
            samples: 20_000,
            m: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReturnSection {
    /// Horizons for the exact (rational) table.
    pub horizons: Vec<usize>,
    /// Horizons for the Rao-Blackwellized estimator.
    pub rb_horizons: Vec<usize>,
    pub rb_samples: u64,
}

impl Default for ReturnSection {
    fn default() -> Self {
        Self {
            horizons: vec![2, 4, 6, 8, 12, 16, 20, 24],
            rb_horizons: vec![4, 8, 12, 16],
            rb_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalTimeSection {
    pub horizon: usize,
    pub levels: Vec<i64>,
}

impl Default for LocalTimeSection {
    fn default() -> Self {
        Self {
            horizon: 16,
            levels: vec![0, 1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeSection {
    pub horizons: Vec<usize>,
    pub samples: u64,
}

impl Default for TubeSection {
    fn default() -> Self {
        Self {
            horizons: vec![16, 32, 64],
            samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    /// Largest horizon of the grid `{8, 12, ..., max_horizon}`; the step is
    /// 4 because return probabilities vanish identically at horizons that
    /// are even but not divisible by 4.
    pub max_horizon: usize,
    /// Horizons where an independent Rao-Blackwellized estimate
    /// cross-checks the dynamic program.
    pub rb_spot_horizons: Vec<usize>,
    pub rb_samples: u64,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            max_horizon: 200,
            rb_spot_horizons: vec![28, 36],
            rb_samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiLocalSection {
    pub t: f64,
    pub n: usize,
    pub gamma: f64,
    pub samples: u64,
    /// Samples for the `n → 4n` scaling leg.
    pub scaling_samples: u64,
}

impl Default for QuasiLocalSection {
    fn default() -> Self {
        Self {
            t: 4.0,
            n: 1 << 14,
            gamma: 0.25,
            samples: 100_000,
            scaling_samples: 40_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct P2Section {
    /// Large time for the `t·p2(t,0) → π/2` check.
    pub t_limit: f64,
    pub limit_samples: u64,
    /// Times where `(2πt)^{-1/2} p2(t,0)` is matched to the kernel diagonal.
    pub match_t: Vec<f64>,
    pub match_samples: u64,
    /// Sub-intervals of the bridge-functional grid.
    pub m: usize,
}

impl Default for P2Section {
    fn default() -> Self {
        Self {
            t_limit: 100.0,
            limit_samples: 100_000,
            match_t: vec![1.0, 4.0, 16.0],
            match_samples: 40_000,
            m: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixedLltSection {
    pub t: f64,
    pub n: usize,
    pub samples: u64,
}

impl Default for MixedLltSection {
    fn default() -> Self {
        Self {
            t: 4.0,
            n: 1 << 14,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegMomentSection {
    /// Slopes for the unit-interval bridge identity (mean exactly 1).
    pub alphas: Vec<f64>,
    /// Times for the scaled identity (mean exactly `1/t`).
    pub scaled_t: Vec<f64>,
    pub m: usize,
    pub samples: u64,
}

impl Default for NegMomentSection {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 2.0, 4.0],
            scaled_t: vec![1.0, 9.0],
            m: 4096,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CondMaxSection {
    pub n: usize,
    pub theta: f64,
    pub samples: u64,
}

impl Default for CondMaxSection {
    fn default() -> Self {
        Self {
            n: 1024,
            theta: 1.0,
            samples: 40_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToySection {
    /// Embedding scales `α_1..α_N`.
    pub alpha: Vec<f64>,
    /// Step probabilities `p_0..p_N` as exact fractions `p_num[i]/p_den[i]`.
    pub p_num: Vec<i64>,
    pub p_den: Vec<i64>,
    pub declared_independent: bool,
    /// Horizons for the exact-return table (DP + spectral cross-check).
    pub return_horizons: Vec<usize>,
    /// Long horizon for the spectral local-limit check.
    pub fourier_horizon: usize,
    pub point_horizon: usize,
    pub point: Vec<i64>,
    /// Window experiment half-horizon (simulates `2n` steps) and window
    /// exponent: the window is `(-n^e, n^e)`.
    pub window_n: usize,
    pub window_exponent: f64,
    pub weyl_period: f64,
    pub weyl_radius: i64,
}

impl Default for ToySection {
    fn default() -> Self {
        Self {
            alpha: vec![1.0, std::f64::consts::SQRT_2],
            p_num: vec![1, 2, 2],
            p_den: vec![5, 5, 5],
            declared_independent: true,
            return_horizons: vec![1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64],
            fourier_horizon: 10_000,
            point_horizon: 400,
            point: vec![4, -2],
            window_n: 200,
            window_exponent: 0.3,
            weyl_period: 1.0,
            weyl_radius: 60,
        }
    }
}

impl ToySection {
    /// Build the validated model from the configured fractions.
    pub fn model(&self) -> Result<ToyModel, aff_lab_core::Error> {
        if self.p_num.len() != self.p_den.len() {
            return Err(aff_lab_core::Error::InvalidParameter {
                name: "toy.p_num/p_den".into(),
                value: format!("{} vs {}", self.p_num.len(), self.p_den.len()),
                requirement: "parallel arrays of equal length".into(),
            });
        }
        let p: Vec<Rational64> = self
            .p_num
            .iter()
            .zip(&self.p_den)
            .map(|(&n, &d)| Rational64::new(n, d))
            .collect();
        ToyModel::new(self.alpha.clone(), p, self.declared_independent)
    }
}

/// Configuration rejected with the full list of violated preconditions.
#[derive(Debug, thiserror::Error)]
#[error("invalid configuration:\n{}", violations.join("\n"))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl LabConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: LabConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization; stamped on every output.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Check every precondition, collecting all violations.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(violations: &mut Vec<String>, ok: bool, msg: &str) {
            if !ok {
                violations.push(format!("  - {msg}"));
            }
        }
        let mut violations = Vec::new();
        check(
            &mut violations,
            !self.kernel.t_grid.is_empty() && self.kernel.t_grid.iter().all(|&t| t > 0.0),
            "kernel.t_grid must be nonempty with positive times",
        );
        check(
            &mut violations,
            self.kernel.r_grid.iter().all(|&r| r >= 0.0),
            "kernel.r_grid must contain nonnegative radii",
        );
        check(
            &mut violations,
            !self.diag_asymptote.t_grid.is_empty()
                && self.diag_asymptote.t_grid.iter().all(|&t| t > 0.0),
            "diag_asymptote.t_grid must be nonempty with positive times",
        );
        check(
            &mut violations,
            self.kernel_consistency.ck_s > 0.0 && self.kernel_consistency.ck_t > 0.0,
            "kernel_consistency times must be positive",
        );
        check(
            &mut violations,
            self.walk.n > 0 && self.walk.t > 0.0,
            "walk.n and walk.t must be positive",
        );
        check(
            &mut violations,
            self.return_probs.horizons.iter().all(|&h| h % 2 == 0 && h > 0),
            "return_probs.horizons must be positive even step counts",
        );
        check(
            &mut violations,
            self.return_probs.rb_horizons.iter().all(|&h| h % 2 == 0 && h > 0),
            "return_probs.rb_horizons must be positive even step counts",
        );
        check(
            &mut violations,
            self.decay.max_horizon >= 8 && self.decay.max_horizon % 4 == 0,
            "decay.max_horizon must be a multiple of 4, at least 8",
        );
        check(
            &mut violations,
            self.decay.rb_spot_horizons.iter().all(|&h| h % 4 == 0),
            "decay.rb_spot_horizons must be multiples of 4 (other horizons have zero return probability)",
        );
        if let Err(e) =
            QuasiLocalConfig::new(self.quasi_local.t, self.quasi_local.n, self.quasi_local.gamma)
        {
            violations.push(format!("  - quasi_local: {e}"));
        }
        check(
            &mut violations,
            self.mixed_llt.t > 0.0 && self.mixed_llt.n % 2 == 0 && self.mixed_llt.n > 0,
            "mixed_llt needs positive t and a positive even n",
        );
        check(
            &mut violations,
            self.p2.m >= 4 && self.p2.m % 2 == 0,
            "p2.m must be an even grid size of at least 4",
        );
        check(
            &mut violations,
            self.neg_moment.m >= 1,
            "neg_moment.m must be at least 1",
        );
        check(
            &mut violations,
            !self.neg_moment.alphas.is_empty()
                && self.neg_moment.alphas.iter().all(|&a| a > 0.0 && a.is_finite())
                && self.neg_moment.scaled_t.iter().all(|&t| t > 0.0 && t.is_finite()),
            "neg_moment.alphas must be nonempty with positive finite slopes, and neg_moment.scaled_t positive and finite",
        );
        check(
            &mut violations,
            [
                self.walk.samples,
                self.return_probs.rb_samples,
                self.tube.samples,
                self.decay.rb_samples,
                self.quasi_local.samples,
                self.quasi_local.scaling_samples,
                self.p2.limit_samples,
                self.p2.match_samples,
                self.mixed_llt.samples,
                self.neg_moment.samples,
                self.cond_max.samples,
            ]
            .iter()
            .all(|&s| s > 0),
            "all sample budgets must be positive",
        );
        if let Err(e) = self.toy.model() {
            violations.push(format!("  - toy: {e}"));
        }
        check(
            &mut violations,
            self.toy.point.len() == self.toy.alpha.len(),
            "toy.point must have one coordinate per scale",
        );
        check(
            &mut violations,
            self.toy.window_n > 0 && self.toy.window_exponent > 0.0,
            "toy.window_n and toy.window_exponent must be positive",
        );
        check(
            &mut violations,
            self.toy.weyl_period > 0.0 && self.toy.weyl_radius >= 0,
            "toy.weyl_period must be positive and toy.weyl_radius nonnegative",
        );
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }
}
