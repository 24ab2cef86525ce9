//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls the crate's pmf, likelihood or optimizer code: the
//! likelihoods are direct sums over explicitly normalized weights and the
//! maximizers are exhaustive grids.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankfit::histogram::RankHistogram;

/// Direct `Σ f(r) ln p(r)` for a right-truncated zeta on `1..=support`.
pub fn zeta_loglik_direct(freqs: &[f64], alpha: f64, support: usize) -> f64 {
    if freqs.len() > support {
        return f64::NEG_INFINITY;
    }
    let weights: Vec<f64> = (1..=support).map(|r| (r as f64).powf(-alpha)).collect();
    let total: f64 = weights.iter().sum();
    freqs.iter().zip(&weights).map(|(f, w)| f * (w / total).ln()).sum()
}

/// Direct `Σ f(r) ln p(r)` for a right-truncated geometric on `1..=support`,
/// `p(r) ∝ (1-q)^(r-1)`.
pub fn geometric_loglik_direct(freqs: &[f64], q: f64, support: usize) -> f64 {
    if freqs.len() > support {
        return f64::NEG_INFINITY;
    }
    let weights: Vec<f64> = (0..support).map(|k| (1.0 - q).powi(k as i32)).collect();
    let total: f64 = weights.iter().sum();
    freqs.iter().zip(&weights).map(|(f, w)| f * (w / total).ln()).sum()
}

/// Dense-grid maximizer: scan `[lo, hi]` with `step`, then scan once more
/// with step `step * 1e-4` over the two cells around the winner.
pub fn grid_argmax(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let scan = |a: f64, b: f64, h: f64| {
        let n = ((b - a) / h).round() as usize;
        let mut best = (a, objective(a));
        for i in 1..=n {
            let x = (a + h * i as f64).min(b);
            let v = objective(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        best
    };
    let (x0, _) = scan(lo, hi, step);
    let a = (x0 - step).max(lo);
    let b = (x0 + step).min(hi);
    scan(a, b, step * 1e-4)
}

/// Exact probability that `n` draws from `probs` miss at least one of the
/// `domain` categories (`probs.len() < domain` means some are impossible).
/// Inclusion–exclusion over all subsets of the categories.
pub fn undersampling_exact(probs: &[f64], domain: usize, n: u64) -> f64 {
    if probs.len() < domain {
        return 1.0;
    }
    let k = probs.len();
    assert!(k <= 24, "inclusion-exclusion is exponential in the domain size");
    let mut all_attested = 0.0;
    for mask in 0u32..(1 << k) {
        let missing: f64 = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| probs[i]).sum();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        all_attested += sign * (1.0 - missing).max(0.0).powf(n as f64);
    }
    1.0 - all_attested
}

/// Geometric probabilities on `1..=support`, normalized by direct summation.
pub fn geometric_probs(q: f64, support: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..support).map(|k| (1.0 - q).powi(k as i32)).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

/// Random ranked histogram: `r_max` uniform in `1..=max_ranks`, positive
/// integer or real frequencies, sorted descending.
pub fn random_histogram(rng: &mut ChaCha8Rng, max_ranks: u32) -> RankHistogram {
    let r_max = rng.random_range(1..=max_ranks);
    let integer = rng.random_bool(0.5);
    let scale: f64 = rng.random_range(5.0..400.0);
    let decay: f64 = rng.random_range(0.05..1.5);
    let mut freqs: Vec<f64> = (0..r_max)
        .map(|i| {
            let base = scale * (-decay * i as f64).exp() * rng.random_range(0.5..1.5);
            if integer {
                base.round().max(1.0)
            } else {
                base.max(0.1)
            }
        })
        .collect();
    freqs.sort_by(|a, b| b.total_cmp(a));
    RankHistogram::from_frequencies("random", "count", &freqs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn freqs(h: &RankHistogram) -> Vec<f64> {
    h.frequencies().collect()
}
