//! One function per experiment.  Each computes its results through the core
//! library and renders deterministic CSV/JSON reports; the acceptance
//! criteria reuse the same computations.

use crate::config::LabConfig;
use crate::contrast;
use crate::output::{fmt_f64, render_csv, render_json, write_report, Provenance};
use aff_lab_core::combinatorics::{
    exact_return_prob, fit_decay, local_time_pmf, rb_bridged_return_estimator,
    rb_return_estimator, return_prob_dp, return_prob_dp_exact, tube_halfwidth, tube_probability,
    DecayFit, ENUMERATION_CAP,
};
use aff_lab_core::estimators::{
    conditioned_max_moment, mixed_llt_density, neg_moment_bridge, p2_zero, quasi_local_estimator,
    QuasiLocalConfig,
};
use aff_lab_core::heat_kernel::{
    chapman_kolmogorov_residual, diag_asymptotic_ratio, diag_limit, hyperbolic_normalization,
    p_aff_diag, p_h2_with_error,
};
use aff_lab_core::stats::parallel_mc;
use aff_lab_core::toy::{
    point_prob_from, ratio_to_f64, toy_distribution, toy_exact_return, toy_fourier_return,
    weyl_average, window_prob_from,
};
use aff_lab_core::walk::{sample_bridge_functional, simulate_walk, GridRule, InnovationSpec};
use anyhow::{bail, Context};
use num::BigRational;
use serde_json::json;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Experiment names, in reporting order.
pub const EXPERIMENTS: &[&str] = &[
    "kernel",
    "diag-asymptote",
    "kernel-consistency",
    "path-dump",
    "walk-stats",
    "exact-return",
    "rb-return",
    "local-time",
    "tube",
    "decay-band",
    "quasi-local",
    "p2-zero",
    "mixed-llt",
    "neg-moment",
    "cond-max",
    "toy-return",
    "toy-point",
    "toy-window",
    "weyl",
    "contrast-report",
];

/// Dispatch one experiment by name, writing its reports under `out_dir`.
pub fn run_experiment(
    name: &str,
    cfg: &LabConfig,
    out_dir: &Path,
) -> anyhow::Result<Vec<PathBuf>> {
    cfg.validate()?;
    let run = || -> anyhow::Result<Vec<PathBuf>> {
        match name {
            "kernel" => kernel(cfg, out_dir),
            "diag-asymptote" => diag_asymptote(cfg, out_dir),
            "kernel-consistency" => kernel_consistency(cfg, out_dir),
            "path-dump" => path_dump(cfg, out_dir),
            "walk-stats" => walk_stats(cfg, out_dir),
            "exact-return" => exact_return(cfg, out_dir),
            "rb-return" => rb_return(cfg, out_dir),
            "local-time" => local_time(cfg, out_dir),
            "tube" => tube(cfg, out_dir),
            "decay-band" => decay_band(cfg, out_dir),
            "quasi-local" => quasi_local(cfg, out_dir),
            "p2-zero" => p2_zero_experiment(cfg, out_dir),
            "mixed-llt" => mixed_llt(cfg, out_dir),
            "neg-moment" => neg_moment(cfg, out_dir),
            "cond-max" => cond_max(cfg, out_dir),
            "toy-return" => toy_return(cfg, out_dir),
            "toy-point" => toy_point(cfg, out_dir),
            "toy-window" => toy_window(cfg, out_dir),
            "weyl" => weyl(cfg, out_dir),
            "contrast-report" => contrast_experiment(cfg, out_dir),
            other => bail!(
                "unknown experiment '{other}'; available: {}",
                EXPERIMENTS.join(", ")
            ),
        }
    };
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .context("building worker pool")?;
        pool.install(run)
    } else {
        run()
    }
}

fn prov(name: &str, cfg: &LabConfig) -> Provenance {
    Provenance::new(name, &cfg.hash(), cfg.seed)
}

fn rational_cols(r: &BigRational) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

// ---------------------------------------------------------------------------
// Heat-kernel experiments
// ---------------------------------------------------------------------------

fn kernel(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for &t in &cfg.kernel.t_grid {
        let diag = p_aff_diag(t)?;
        let ratio = diag_asymptotic_ratio(t)?;
        for &r in &cfg.kernel.r_grid {
            let (value, error) = p_h2_with_error(t, r)?;
            rows.push(vec![
                fmt_f64(t),
                fmt_f64(r),
                fmt_f64(value),
                fmt_f64(diag),
                fmt_f64(ratio),
                fmt_f64(error),
            ]);
        }
    }
    let doc = render_csv(
        &prov("kernel", cfg),
        "t,r,p_h2,p_aff_diag,ratio_to_asymptote,quadrature_error_estimate",
        &rows,
    );
    Ok(vec![write_report(out_dir, "kernel.csv", &doc)?])
}

/// One diagonal-asymptote evaluation: `t^{3/2} p(t,e,e)` against its limit.
#[derive(Debug, Clone)]
pub struct DiagPoint {
    pub t: f64,
    pub density: f64,
    pub scaled: f64,
    pub ratio: f64,
}

pub fn diag_series(t_grid: &[f64]) -> anyhow::Result<Vec<DiagPoint>> {
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let density = p_aff_diag(t)?;
        let ratio = diag_asymptotic_ratio(t)?;
        out.push(DiagPoint {
            t,
            density,
            scaled: t.powf(1.5) * density,
            ratio,
        });
    }
    Ok(out)
}

fn diag_asymptote(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let series = diag_series(&cfg.diag_asymptote.t_grid)?;
    let rows: Vec<Vec<String>> = series
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.t),
                fmt_f64(p.density),
                fmt_f64(p.scaled),
                fmt_f64(diag_limit()),
                fmt_f64(p.ratio),
            ]
        })
        .collect();
    let doc = render_csv(
        &prov("diag-asymptote", cfg),
        "t,p_aff_diag,t32_scaled,limit,ratio",
        &rows,
    );
    Ok(vec![write_report(out_dir, "diag_asymptote.csv", &doc)?])
}

/// Normalization and semigroup residuals for the hyperbolic kernel.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub normalization: Vec<(f64, f64)>,
    pub ck_residual: f64,
}

pub fn consistency_checks(cfg: &LabConfig) -> anyhow::Result<ConsistencyReport> {
    let sect = &cfg.kernel_consistency;
    let mut normalization = Vec::new();
    for &t in &sect.normalization_t {
        normalization.push((t, hyperbolic_normalization(t)?));
    }
    let ck_residual = chapman_kolmogorov_residual(sect.ck_s, sect.ck_t, sect.ck_r0)?;
    Ok(ConsistencyReport {
        normalization,
        ck_residual,
    })
}

fn kernel_consistency(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let report = consistency_checks(cfg)?;
    let body = json!({
        "normalization": report
            .normalization
            .iter()
            .map(|&(t, mass)| json!({"t": t, "mass": mass, "residual": (mass - 1.0).abs()}))
            .collect::<Vec<_>>(),
        "chapman_kolmogorov": {
            "s": cfg.kernel_consistency.ck_s,
            "t": cfg.kernel_consistency.ck_t,
            "r0": cfg.kernel_consistency.ck_r0,
            "residual": report.ck_residual,
        },
    });
    let doc = render_json(&prov("kernel-consistency", cfg), body);
    Ok(vec![write_report(out_dir, "kernel_consistency.json", &doc)?])
}

// ---------------------------------------------------------------------------
// Walk experiments
// ---------------------------------------------------------------------------

fn path_dump(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let epsilon = (cfg.walk.t / cfg.walk.n as f64).sqrt();
    let path = simulate_walk(cfg.walk.n, epsilon, &InnovationSpec::bernoulli(), cfg.seed)?;
    let rows: Vec<Vec<String>> = (0..=cfg.walk.n)
        .map(|k| {
            vec![
                k.to_string(),
                path.s[k].to_string(),
                fmt_f64(path.a_at(k)),
                fmt_f64(path.b_terms[k]),
            ]
        })
        .collect();
    let doc = render_csv(&prov("path-dump", cfg), "step,S,a,b", &rows);
    Ok(vec![write_report(out_dir, "path_dump.csv", &doc)?])
}

fn walk_stats(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let (t, m) = (cfg.walk.t, cfg.walk.m);
    let stats = parallel_mc(cfg.seed, cfg.walk.samples, |rng| {
        sample_bridge_functional(t, m, GridRule::LeftEndpoint, rng)
            .expect("validated parameters")
            .value
    });
    let body = json!({
        "statistic": "bridge_functional_mean",
        "t": t,
        "m": m,
        "mean": stats.mean(),
        "stderr": stats.stderr(),
        "n_samples": stats.count(),
    });
    let doc = render_json(&prov("walk-stats", cfg), body);
    Ok(vec![write_report(out_dir, "walk_stats.json", &doc)?])
}

// ---------------------------------------------------------------------------
// Subgroup-walk combinatorics experiments
// ---------------------------------------------------------------------------

/// Exact return probability by the strongest exact method available.
pub fn exact_return_value(horizon: usize) -> anyhow::Result<BigRational> {
    if horizon <= ENUMERATION_CAP {
        Ok(exact_return_prob(horizon)?)
    } else {
        Ok(return_prob_dp_exact(horizon)?)
    }
}

fn exact_return(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for &h in &cfg.return_probs.horizons {
        let value = exact_return_value(h)?;
        let (num, den) = rational_cols(&value);
        rows.push(vec![h.to_string(), num, den]);
    }
    let doc = render_csv(&prov("exact-return", cfg), "n,value_num,value_den", &rows);
    Ok(vec![write_report(out_dir, "exact_return.csv", &doc)?])
}

fn rb_return(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for &h in &cfg.return_probs.rb_horizons {
        let est = rb_return_estimator(h, cfg.return_probs.rb_samples, cfg.seed)?;
        rows.push(vec![
            h.to_string(),
            fmt_f64(est.estimate),
            fmt_f64(est.stderr),
            est.samples.to_string(),
            est.seed.to_string(),
        ]);
    }
    let doc = render_csv(
        &prov("rb-return", cfg),
        "n,estimate,stderr,samples,seed",
        &rows,
    );
    Ok(vec![write_report(out_dir, "rb_return.csv", &doc)?])
}

fn local_time(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let h = cfg.local_time.horizon;
    let mut rows = Vec::new();
    for &a in &cfg.local_time.levels {
        for k in 0..=h {
            let value = local_time_pmf(h, a, k)?;
            let (num, den) = rational_cols(&value);
            rows.push(vec![h.to_string(), a.to_string(), k.to_string(), num, den]);
        }
    }
    let doc = render_csv(
        &prov("local-time", cfg),
        "n,a,k,value_num,value_den",
        &rows,
    );
    Ok(vec![write_report(out_dir, "local_time.csv", &doc)?])
}

fn tube(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for &n in &cfg.tube.horizons {
        let halfwidth = tube_halfwidth(n)?;
        let result = tube_probability(n, halfwidth, cfg.tube.samples, cfg.seed)?;
        let (num, den) = result
            .exact
            .as_ref()
            .map(rational_cols)
            .unwrap_or_default();
        rows.push(vec![
            n.to_string(),
            halfwidth.to_string(),
            fmt_f64(result.probability),
            num,
            den,
            fmt_f64(result.mc.estimate),
            fmt_f64(result.mc.stderr),
            result.mc.samples.to_string(),
            result.mc.seed.to_string(),
        ]);
    }
    let doc = render_csv(
        &prov("tube", cfg),
        "n,halfwidth,probability,exact_num,exact_den,mc_estimate,mc_stderr,samples,seed",
        &rows,
    );
    Ok(vec![write_report(out_dir, "tube.csv", &doc)?])
}

/// The decay-band series over horizons `{8, 12, ..., max}`: exact values
/// below the enumeration cap, dynamic-program values beyond.
pub fn decay_series(max_horizon: usize) -> anyhow::Result<DecayFit> {
    let mut entries = Vec::new();
    for h in (8..=max_horizon).step_by(4) {
        let p = if h <= ENUMERATION_CAP {
            ratio_to_f64(&exact_return_prob(h)?)
        } else {
            return_prob_dp(h)?
        };
        entries.push((h, p));
    }
    Ok(fit_decay(&entries)?)
}

/// Log-log slope of the normalized rate over the top half of the grid; a
/// value near 0 means the normalizer captures the decay order.
pub fn top_half_slope(fit: &DecayFit) -> f64 {
    let top = &fit.points[fit.points.len() / 2..];
    let xs: Vec<f64> = top.iter().map(|p| ((p.horizon / 2) as f64).ln()).collect();
    let ys: Vec<f64> = top.iter().map(|p| p.rate.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn decay_band(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let fit = decay_series(cfg.decay.max_horizon)?;
    let mut rb = std::collections::BTreeMap::new();
    for &h in &cfg.decay.rb_spot_horizons {
        let est = rb_bridged_return_estimator(h, cfg.decay.rb_samples, cfg.seed)?;
        rb.insert(h, est);
    }
    let rows: Vec<Vec<String>> = fit
        .points
        .iter()
        .map(|p| {
            let (rb_est, rb_err) = match rb.get(&p.horizon) {
                Some(e) => (fmt_f64(e.estimate), fmt_f64(e.stderr)),
                None => (String::new(), String::new()),
            };
            vec![
                p.horizon.to_string(),
                fmt_f64(p.probability),
                fmt_f64(p.rate),
                rb_est,
                rb_err,
            ]
        })
        .collect();
    let csv = render_csv(
        &prov("decay-band", cfg),
        "horizon,probability,rate,rb_estimate,rb_stderr",
        &rows,
    );
    let summary = json!({
        "min_rate": fit.min_rate,
        "max_rate": fit.max_rate,
        "band_ratio": fit.band_ratio(),
        "top_half_slope": top_half_slope(&fit),
        "points": fit.points.len(),
    });
    let jdoc = render_json(&prov("decay-band", cfg), summary);
    Ok(vec![
        write_report(out_dir, "decay_band.csv", &csv)?,
        write_report(out_dir, "decay_band.json", &jdoc)?,
    ])
}

// ---------------------------------------------------------------------------
// Monte Carlo estimator experiments
// ---------------------------------------------------------------------------

fn quasi_local(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let sect = &cfg.quasi_local;
    let qcfg = QuasiLocalConfig::new(sect.t, sect.n, sect.gamma)?;
    let est = quasi_local_estimator(qcfg, sect.samples, cfg.seed)?;
    let body = json!({
        "estimate": est.estimate.estimate,
        "stderr": est.estimate.stderr,
        "samples": est.estimate.samples,
        "comparator": est.comparator.estimate,
        "comparator_stderr": est.comparator.stderr,
        "ratio": est.ratio,
        "bridge_prob": est.bridge_prob,
        "conditional_mean": est.conditional_mean.estimate,
        "config": {
            "t": sect.t,
            "n": sect.n,
            "gamma": sect.gamma,
            "epsilon": qcfg.epsilon(),
            "delta": qcfg.delta(),
        },
    });
    let doc = render_json(&prov("quasi-local", cfg), body);
    Ok(vec![write_report(out_dir, "quasi_local.json", &doc)?])
}

fn p2_zero_experiment(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let sect = &cfg.p2;
    let limit = p2_zero(sect.t_limit, sect.m, sect.limit_samples, cfg.seed)?;
    let mut matches = Vec::new();
    for &t in &sect.match_t {
        let est = p2_zero(t, sect.m, sect.match_samples, cfg.seed)?;
        let scaled = est.estimate.estimate / (2.0 * PI * t).sqrt();
        let kernel_diag = p_aff_diag(t)?;
        matches.push(json!({
            "t": t,
            "p2": est.estimate.estimate,
            "stderr": est.estimate.stderr,
            "scaled_density": scaled,
            "kernel_diag": kernel_diag,
            "sigmas": (scaled - kernel_diag).abs() / (est.estimate.stderr / (2.0 * PI * t).sqrt()),
        }));
    }
    let body = json!({
        "estimate": limit.estimate.estimate,
        "stderr": limit.estimate.stderr,
        "samples": limit.estimate.samples,
        "comparator": PI / 2.0 / sect.t_limit,
        "ratio": limit.scaled_by_t / (PI / 2.0),
        "scaled_by_t": limit.scaled_by_t,
        "richardson": limit.richardson,
        "coarse": limit.coarse,
        "min_functional": limit.min_functional,
        "config": {"t": sect.t_limit, "m": sect.m},
        "kernel_matches": matches,
    });
    let doc = render_json(&prov("p2-zero", cfg), body);
    Ok(vec![write_report(out_dir, "p2_zero.json", &doc)?])
}

fn mixed_llt(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let sect = &cfg.mixed_llt;
    let est = mixed_llt_density(sect.t, sect.n, sect.samples, cfg.seed)?;
    let body = json!({
        "estimate": est.estimate.estimate,
        "stderr": est.estimate.stderr,
        "samples": est.estimate.samples,
        "comparator": est.comparator,
        "ratio": est.ratio,
        "bridge_prob": est.bridge_prob,
        "stirling_estimate": est.stirling_estimate,
        "config": {"t": sect.t, "n": sect.n, "epsilon": est.epsilon},
    });
    let doc = render_json(&prov("mixed-llt", cfg), body);
    Ok(vec![write_report(out_dir, "mixed_llt.json", &doc)?])
}

fn neg_moment(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let sect = &cfg.neg_moment;
    let mut unit = Vec::new();
    let mut headline: Option<(f64, f64)> = None;
    for &alpha in &sect.alphas {
        let est = neg_moment_bridge(alpha, 1.0, sect.m, sect.samples, cfg.seed)?;
        if headline.is_none() {
            headline = Some((est.estimate.estimate, est.estimate.stderr));
        }
        unit.push(json!({
            "alpha": alpha,
            "estimate": est.estimate.estimate,
            "stderr": est.estimate.stderr,
            "sigmas_from_1": est.estimate.sigmas_from(1.0),
            "min_functional": est.min_functional,
        }));
    }
    let mut scaled = Vec::new();
    for &t in &sect.scaled_t {
        // (∫_0^t e^{2 B̃})^{-1} = t^{-1} (∫_0^1 e^{2√t b})^{-1}: the scaled
        // identity is the unit identity at slope α = 2√t.
        let alpha = 2.0 * t.sqrt();
        let est = neg_moment_bridge(alpha, 1.0, sect.m, sect.samples, cfg.seed)?;
        scaled.push(json!({
            "t": t,
            "alpha": alpha,
            "estimate": est.estimate.estimate / t,
            "stderr": est.estimate.stderr / t,
            "target": 1.0 / t,
            "sigmas_from_target": est.estimate.sigmas_from(1.0),
        }));
    }
    // Headline fields: unit identity at the first configured slope
    // (its exact comparator is 1).
    let (head_est, head_err) = headline.unwrap_or((f64::NAN, f64::NAN));
    let body = json!({
        "estimate": head_est,
        "stderr": head_err,
        "samples": sect.samples,
        "comparator": 1.0,
        "ratio": head_est,
        "config": {"m": sect.m},
        "unit_identity": unit,
        "scaled_identity": scaled,
    });
    let doc = render_json(&prov("neg-moment", cfg), body);
    Ok(vec![write_report(out_dir, "neg_moment.json", &doc)?])
}

fn cond_max(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let sect = &cfg.cond_max;
    let est = conditioned_max_moment(sect.n, sect.theta, sect.samples, cfg.seed)?;
    let body = json!({
        "estimate": est.estimate.estimate,
        "stderr": est.estimate.stderr,
        "samples": est.estimate.samples,
        "comparator": 2.0,
        "ratio": est.estimate.estimate / 2.0,
        "config": {"n": sect.n, "theta": sect.theta},
    });
    let doc = render_json(&prov("cond-max", cfg), body);
    Ok(vec![write_report(out_dir, "cond_max.json", &doc)?])
}

// ---------------------------------------------------------------------------
// Toy-model experiments
// ---------------------------------------------------------------------------

fn toy_return(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let model = cfg.toy.model()?;
    let mut rows = Vec::new();
    for &n in &cfg.toy.return_horizons {
        let exact = toy_exact_return(n, &model)?;
        let (num, den) = rational_cols(&exact);
        let float = ratio_to_f64(&exact);
        let fourier = toy_fourier_return(n, &model)?;
        let ratio = if fourier != 0.0 { float / fourier } else { f64::NAN };
        rows.push(vec![
            n.to_string(),
            num,
            den,
            fmt_f64(float),
            fmt_f64(fourier),
            fmt_f64(ratio),
        ]);
    }
    let doc = render_csv(
        &prov("toy-return", cfg),
        "n,exact_num,exact_den,float_value,comparator,ratio",
        &rows,
    );
    Ok(vec![write_report(out_dir, "toy_return.csv", &doc)?])
}

fn toy_point(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let model = cfg.toy.model()?;
    let dist = toy_distribution(cfg.toy.point_horizon, &model)?;
    let point = point_prob_from(&dist, &cfg.toy.point, &model)?;
    let (num, den) = rational_cols(&point.exact);
    let rows = vec![vec![
        cfg.toy.point_horizon.to_string(),
        num,
        den,
        fmt_f64(point.value),
        fmt_f64(point.comparator),
        fmt_f64(point.ratio),
    ]];
    let doc = render_csv(
        &prov("toy-point", cfg),
        "n,exact_num,exact_den,float_value,comparator,ratio",
        &rows,
    );
    Ok(vec![write_report(out_dir, "toy_point.csv", &doc)?])
}

fn toy_window(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let model = cfg.toy.model()?;
    let n = cfg.toy.window_n;
    let deltainv = (n as f64).powf(cfg.toy.window_exponent);
    let dist = toy_distribution(2 * n, &model)?;
    let window = window_prob_from(&dist, deltainv, &model)?;
    let (num, den) = rational_cols(&window.exact);
    let rows = vec![vec![
        n.to_string(),
        num,
        den,
        fmt_f64(window.value),
        fmt_f64(window.comparator),
        fmt_f64(window.ratio),
    ]];
    let doc = render_csv(
        &prov("toy-window", cfg),
        "n,exact_num,exact_den,float_value,comparator,ratio",
        &rows,
    );
    Ok(vec![write_report(out_dir, "toy_window.csv", &doc)?])
}

fn weyl(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let model = cfg.toy.model()?;
    let period = cfg.toy.weyl_period;
    let radius = cfg.toy.weyl_radius;
    let mut rows = Vec::new();
    let constant = weyl_average(&model, period, |_| 1.0, radius)?;
    rows.push(("constant", constant));
    let first = weyl_average(&model, period, |x| (2.0 * PI * x / period).cos(), radius)?;
    rows.push(("cos_first_harmonic", first));
    let second = weyl_average(&model, period, |x| (4.0 * PI * x / period).cos(), radius)?;
    rows.push(("cos_second_harmonic", second));
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, avg)| {
            vec![
                name.to_string(),
                fmt_f64(avg.average),
                fmt_f64(avg.comparator),
                avg.points.to_string(),
            ]
        })
        .collect();
    let doc = render_csv(
        &prov("weyl", cfg),
        "function,average,comparator,points",
        &csv_rows,
    );
    Ok(vec![write_report(out_dir, "weyl.csv", &doc)?])
}

// ---------------------------------------------------------------------------
// Contrast report
// ---------------------------------------------------------------------------

fn contrast_experiment(cfg: &LabConfig, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let fit = decay_series(cfg.decay.max_horizon)?;
    let diag = diag_series(&cfg.diag_asymptote.t_grid)?;
    let ratios: Vec<(f64, f64)> = diag.iter().map(|p| (p.t, p.ratio)).collect();
    let report = contrast::contrast_report(&fit, &ratios, Some(&prov("contrast-report", cfg)))?;
    Ok(vec![write_report(out_dir, "contrast_report.txt", &report)?])
}
