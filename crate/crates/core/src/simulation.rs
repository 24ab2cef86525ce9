//! Seeded Monte Carlo experiments.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`). A run seeded with
//! `seed` gives trial `t` of sample-size index `s` the stream
//! `(s << 32) | t` of the generator seeded with `seed`, so trials are
//! independent of each other and of scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::RankHistogram;
use crate::models::{cdf_table, ModelKind, ModelParams};
use crate::selection::select;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

/// Generator for one trial.
pub fn trial_rng(seed: u64, size_index: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((size_index as u64) << 32) | trial as u64);
    rng
}

/// `n` draws from `m`, as a count per model rank (`counts[r - 1]`).
///
/// Inverse-CDF sampling over the `R`-point support.
pub fn sample_counts<R: Rng + ?Sized>(m: &ModelParams, n: u64, rng: &mut R) -> Vec<u64> {
    let cdf = cdf_table(m);
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        counts[idx] += 1;
    }
    counts
}

/// Ranks sampled counts into a histogram. Categories are named by their
/// model rank; unattested ranks are omitted.
pub fn counts_to_histogram(counts: &[u64]) -> Result<RankHistogram> {
    let records = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| ((i + 1).to_string(), c as f64))
        .collect();
    Ok(RankHistogram::from_records("sample", "draws", records)?.histogram)
}

/// `n` independent draws from `m`, re-ranked by observed frequency.
pub fn sample(m: &ModelParams, n: u64, seed: u64) -> Result<RankHistogram> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    counts_to_histogram(&sample_counts(m, n, &mut trial_rng(seed, 0, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndersamplingEstimate {
    /// Fraction of trials attesting fewer than `N` distinct ranks.
    pub estimate: f64,
    /// 95% half-width: normal approximation plus a `1 / (2 trials)`
    /// continuity correction.
    pub half_width: f64,
    pub trials: u32,
    pub sample_size: u64,
}

/// Estimates the probability that a sample of size `n` from `m` leaves at
/// least one of the `N` ranks unattested.
pub fn undersampling_probability(m: &ModelParams, n: u64, trials: u32, seed: u64) -> Result<UndersamplingEstimate> {
    if trials == 0 || n == 0 {
        return Err(Error::InvalidConfig("trials and sample size must be at least 1".into()));
    }
    let domain = m.domain() as usize;
    let hits: u32 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let counts = sample_counts(m, n, &mut trial_rng(seed, 0, t));
            u32::from(counts.iter().filter(|&&c| c > 0).count() < domain)
        })
        .sum();
    let t = trials as f64;
    let p = hits as f64 / t;
    let half_width = 1.959_963_984_540_054 * (p * (1.0 - p) / t).sqrt() + 0.5 / t;
    Ok(UndersamplingEstimate {
        estimate: p,
        half_width,
        trials,
        sample_size: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub trials: u32,
    pub sample_sizes: Vec<u64>,
    pub model: ModelParams,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "sample sizes must be non-empty and at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregates for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub sample_size: u64,
    /// Median `|fitted - true|` of the true kind's shape parameter over the
    /// trials where that kind could be fitted.
    pub median_abs_param_error: Option<f64>,
    pub aicc_true_fraction: f64,
    pub bic_true_fraction: f64,
    /// Trials with `r_max < N`.
    pub undersampled_fraction: f64,
    pub mean_r_max: f64,
    /// Trials whose selection failed or whose true-kind fit was degenerate.
    pub failed_trials: u32,
    pub degenerate_trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub config: SimulationConfig,
    pub ensemble: Vec<ModelKind>,
    pub per_size: Vec<SizeStats>,
}

impl RecoveryStats {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "sample_size\tmedian_abs_param_error\taicc_true_fraction\tbic_true_fraction\tundersampled_fraction\tmean_r_max\tfailed_trials\n",
        );
        for s in &self.per_size {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                s.sample_size,
                s.median_abs_param_error.map_or("NA".to_string(), |v| v.to_string()),
                s.aicc_true_fraction,
                s.bic_true_fraction,
                s.undersampled_fraction,
                s.mean_r_max,
                s.failed_trials
            ));
        }
        out
    }
}

struct TrialOutcome {
    r_max: u32,
    aicc_true: bool,
    bic_true: bool,
    param_error: Option<f64>,
    failed: bool,
    degenerate: bool,
}

fn run_trial(cfg: &SimulationConfig, ensemble: &[ModelKind], size_index: u32, n: u64, trial: u32) -> TrialOutcome {
    let truth = cfg.model;
    let counts = sample_counts(&truth, n, &mut trial_rng(cfg.seed, size_index, trial));
    let hist = counts_to_histogram(&counts).expect("n >= 1 yields a non-empty sample");
    let r_max = hist.r_max();
    match select(&hist, truth.domain(), ensemble) {
        Ok(table) => {
            let true_row = table.row(truth.kind()).and_then(|r| r.fit.as_ref());
            TrialOutcome {
                r_max,
                aicc_true: table.best_by_aicc == Some(truth.kind()),
                bic_true: table.best_by_bic == Some(truth.kind()),
                param_error: true_row.map(|f| (f.params.shape() - truth.shape()).abs()),
                failed: false,
                degenerate: true_row.is_some_and(|f| !f.converged),
            }
        }
        Err(_) => TrialOutcome {
            r_max,
            aicc_true: false,
            bic_true: false,
            param_error: None,
            failed: true,
            degenerate: false,
        },
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

/// For each sample size, draws `cfg.trials` samples from `cfg.model`, runs
/// [`select`] over `ensemble` on each, and records how often each criterion
/// picks the generating kind and how well its parameter is recovered.
pub fn recovery_experiment(cfg: &SimulationConfig, ensemble: &[ModelKind]) -> Result<RecoveryStats> {
    cfg.validate()?;
    if ensemble.is_empty() {
        return Err(Error::InvalidConfig("empty model ensemble".into()));
    }
    let per_size = cfg
        .sample_sizes
        .iter()
        .enumerate()
        .map(|(si, &n)| {
            let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, ensemble, si as u32, n, t))
                .collect();
            let t = cfg.trials as f64;
            let frac = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / t;
            SizeStats {
                sample_size: n,
                median_abs_param_error: median(outcomes.iter().filter_map(|o| o.param_error).collect()),
                aicc_true_fraction: frac(&|o| o.aicc_true),
                bic_true_fraction: frac(&|o| o.bic_true),
                undersampled_fraction: frac(&|o| o.r_max < cfg.model.domain()),
                mean_r_max: outcomes.iter().map(|o| o.r_max as f64).sum::<f64>() / t,
                failed_trials: outcomes.iter().filter(|o| o.failed).count() as u32,
                degenerate_trials: outcomes.iter().filter(|o| o.degenerate).count() as u32,
            }
        })
        .collect();
    Ok(RecoveryStats {
        config: cfg.clone(),
        ensemble: ensemble.to_vec(),
        per_size,
    })
}
