//! Maximum-likelihood fitting of the ensemble members.
//!
//! For the 2-parameter kinds the log-likelihood strictly decreases in `R`
//! once `R >= r_max` and is `-inf` below it, so the optimal truncation is
//! `R = r_max` and only the shape parameter is searched. The 1-parameter
//! kinds fix `R = N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{summarize, RankHistogram, SummaryStats};
use crate::models::{log_likelihood, ModelKind, ModelParams};
use crate::optimize::{optimize_scalar_with_hint, ScalarOptimum};

/// Search interval for `alpha`.
pub const ALPHA_BOUNDS: (f64, f64) = (0.0, 1e6);
/// Search interval for `q`, an inset of the open interval `(0, 1)`.
pub const Q_BOUNDS: (f64, f64) = (1e-9, 1.0 - 1e-9);
/// Optimizer tolerance on the shape parameter.
pub const PARAM_TOL: f64 = 1e-9;

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// Maximized log-likelihood in nats.
    #[serde(with = "crate::jsonfloat")]
    pub loglik: f64,
    /// `K`, the number of free parameters.
    pub n_params: u32,
    pub converged: bool,
    pub iterations: u32,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Search interval for the shape parameter of `kind`.
pub fn shape_bounds(kind: ModelKind) -> (f64, f64) {
    if kind.is_geometric() {
        Q_BOUNDS
    } else {
        ALPHA_BOUNDS
    }
}

/// `1 / <r>`, the MLE of `q` for an untruncated geometric, clamped into
/// [`Q_BOUNDS`]. A mean rank of 1 clamps to the upper bound.
pub fn mle_q_untruncated(s: &SummaryStats) -> f64 {
    (1.0 / s.mean_rank).clamp(Q_BOUNDS.0, Q_BOUNDS.1)
}

/// Fits `kind` to `hist` over the rank domain `1..=domain`.
pub fn fit(kind: ModelKind, hist: &RankHistogram, domain: u32) -> Result<FitResult> {
    let support = if kind.has_free_support() { hist.r_max() } else { domain };
    fit_at_support(kind, hist, support, domain)
}

/// Maximizes the shape parameter with `R` held at `support`.
///
/// [`fit`] calls this with the optimal truncation; other values are useful
/// for profiling the likelihood in `R`.
pub fn fit_at_support(kind: ModelKind, hist: &RankHistogram, support: u32, domain: u32) -> Result<FitResult> {
    let stats = summarize(hist);
    if domain == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if stats.r_max > domain {
        return Err(Error::DomainTooSmall {
            r_max: stats.r_max,
            domain,
        });
    }
    // Validates R against N and the kind.
    let (lo, hi) = shape_bounds(kind);
    ModelParams::new(kind, if kind.is_geometric() { 0.5 } else { 1.0 }, support, domain)?;

    let mut warnings = Vec::new();
    let objective = |x: f64| match ModelParams::new(kind, x, support, domain) {
        Ok(m) => log_likelihood(&m, &stats),
        Err(_) => f64::NAN,
    };

    let hint = if kind.is_geometric() {
        if stats.mean_rank <= 1.0 {
            warnings.push("mean rank is 1; 1/<r> initialization clamped to the upper bound of q".to_string());
        }
        Some(mle_q_untruncated(&stats))
    } else {
        None
    };

    let ScalarOptimum {
        argmax,
        value,
        iterations,
        flat,
    } = optimize_scalar_with_hint(objective, lo, hi, PARAM_TOL, hint)?;

    if flat {
        warnings.push(format!(
            "likelihood is flat in {} (support has a single rank); parameter is not identifiable",
            if kind.is_geometric() { "q" } else { "alpha" }
        ));
    } else if argmax - lo <= 10.0 * PARAM_TOL || hi - argmax <= 10.0 * PARAM_TOL * hi.max(1.0) {
        warnings.push(format!("optimum at the boundary of the search interval [{lo}, {hi}]"));
    }

    Ok(FitResult {
        kind,
        params: ModelParams::new(kind, argmax, support, domain)?,
        loglik: value,
        n_params: kind.n_params(),
        converged: !flat,
        iterations,
        warnings,
    })
}
