//! Information-criterion model selection.
//!
//! Both criteria have the form `-2 L + penalty`; lower is better. For a
//! criterion `x` the delta of model `i` is `Δ_i = x_i - min_j x_j` and its
//! weight is `exp(-Δ_i / 2) / Σ_j exp(-Δ_j / 2)`. The ratio of two weights
//! is the evidence of one model over the other.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit, FitResult};
use crate::histogram::{summarize, RankHistogram};
use crate::models::{log_likelihood, ModelKind};

/// `AICc = -2 L + 2 K F0 / (F0 - K - 1)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
pub fn aicc(loglik: f64, k: u32, f0: f64) -> Result<f64> {
    let kf = k as f64;
    if !(f0 > kf + 1.0) {
        return Err(Error::SampleTooSmall { f0, k });
    }
    Ok(-2.0 * loglik + 2.0 * kf * f0 / (f0 - kf - 1.0))
}

/// `BIC = -2 L + K ln F0`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn bic(loglik: f64, k: u32, f0: f64) -> Result<f64> {
    if !(f0 > 1.0) {
        return Err(Error::SampleTooSmall { f0, k });
    }
    Ok(-2.0 * loglik + k as f64 * f0.ln())
}

/// Differences from the smallest score. `+inf` stays `+inf`.
pub fn deltas(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
        return Err(Error::NoFiniteScores);
    }
    let min = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .min_by(f64::total_cmp)
        .ok_or(Error::NoFiniteScores)?;
    Ok(scores.iter().map(|s| s - min).collect())
}

/// Normalized `exp(-Δ/2)` weights. A `+inf` score (a model that gives the
/// data zero probability) gets weight exactly 0.
pub fn weights(scores: &[f64]) -> Result<Vec<f64>> {
    let d = deltas(scores)?;
    // exp(-Δ/2) with Δ >= 0 is already max-shifted: the best model gets 1.
    let raw: Vec<f64> = d.iter().map(|&x| (-0.5 * x).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRatio {
    #[serde(with = "crate::jsonfloat")]
    pub ratio: f64,
    /// The denominator weight was zero.
    pub infinite: bool,
}

/// Evidence of model `i` over model `j`, `w_i / w_j`.
pub fn evidence_ratio(w_i: f64, w_j: f64) -> EvidenceRatio {
    if w_j == 0.0 {
        EvidenceRatio {
            ratio: f64::INFINITY,
            infinite: true,
        }
    } else {
        EvidenceRatio {
            ratio: w_i / w_j,
            infinite: false,
        }
    }
}

/// AIC evidence ratio from raw fits: `(L_i / L_j) e^(K_j - K_i)`.
pub fn aic_evidence_closed_form(loglik_i: f64, k_i: u32, loglik_j: f64, k_j: u32) -> f64 {
    (loglik_i - loglik_j + (k_j as f64 - k_i as f64)).exp()
}

/// AICc evidence ratio from raw fits:
/// `(L_i / L_j) exp[F0 (K_j / (F0 - K_j - 1) - K_i / (F0 - K_i - 1))]`.
pub fn aicc_evidence_closed_form(loglik_i: f64, k_i: u32, loglik_j: f64, k_j: u32, f0: f64) -> f64 {
    let (ki, kj) = (k_i as f64, k_j as f64);
    (loglik_i - loglik_j + f0 * (kj / (f0 - kj - 1.0) - ki / (f0 - ki - 1.0))).exp()
}

/// BIC evidence ratio from raw fits: `(L_i / L_j) F0^((K_j - K_i) / 2)`.
pub fn bic_evidence_closed_form(loglik_i: f64, k_i: u32, loglik_j: f64, k_j: u32, f0: f64) -> f64 {
    let dk = k_j as i32 - k_i as i32;
    (loglik_i - loglik_j).exp() * f0.sqrt().powi(dk)
}

/// One ensemble member's scores. Numeric columns are `None` when the fit or
/// the criterion failed; `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub kind: ModelKind,
    pub fit: Option<FitResult>,
    #[serde(rename = "L", with = "crate::jsonfloat::option")]
    pub loglik: Option<f64>,
    #[serde(rename = "AICc", with = "crate::jsonfloat::option")]
    pub aicc: Option<f64>,
    #[serde(rename = "delta_AICc", with = "crate::jsonfloat::option")]
    pub delta_aicc: Option<f64>,
    #[serde(rename = "w_AICc", with = "crate::jsonfloat::option")]
    pub w_aicc: Option<f64>,
    #[serde(rename = "BIC", with = "crate::jsonfloat::option")]
    pub bic: Option<f64>,
    #[serde(rename = "delta_BIC", with = "crate::jsonfloat::option")]
    pub delta_bic: Option<f64>,
    #[serde(rename = "w_BIC", with = "crate::jsonfloat::option")]
    pub w_bic: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTable {
    pub dataset: String,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "N")]
    pub domain: u32,
    pub rows: Vec<SelectionRow>,
    #[serde(rename = "best_by_AICc")]
    pub best_by_aicc: Option<ModelKind>,
    #[serde(rename = "best_by_BIC")]
    pub best_by_bic: Option<ModelKind>,
}

/// Column header of [`SelectionTable::to_tsv`].
pub const SELECTION_COLUMNS: [&str; 8] = [
    "model",
    "L",
    "AICc",
    "delta_AICc",
    "w_AICc",
    "BIC",
    "delta_BIC",
    "w_BIC",
];
/// Column header of [`SelectionTable::best_params_tsv`].
pub const BEST_PARAM_COLUMNS: [&str; 4] = ["model", "R", "alpha", "q"];

fn cell(v: Option<f64>) -> String {
    match v {
        None => "NA".to_string(),
        Some(x) if x.is_nan() => "nan".to_string(),
        Some(x) if x == f64::INFINITY => "inf".to_string(),
        Some(x) if x == f64::NEG_INFINITY => "-inf".to_string(),
        Some(x) if x != 0.0 && !(1e-4..1e15).contains(&x.abs()) => format!("{x:e}"),
        Some(x) => x.to_string(),
    }
}

/// Row of the best-parameter table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestParams {
    pub model: ModelKind,
    #[serde(rename = "R")]
    pub support: Option<u32>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
}

impl SelectionTable {
    pub fn row(&self, kind: ModelKind) -> Option<&SelectionRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    /// Score table: one row per ensemble member, columns
    /// [`SELECTION_COLUMNS`].
    pub fn to_tsv(&self) -> String {
        let mut out = SELECTION_COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            let cells = [r.loglik, r.aicc, r.delta_aicc, r.w_aicc, r.bic, r.delta_bic, r.w_bic].map(cell);
            let _ = writeln!(out, "{}\t{}", r.kind, cells.join("\t"));
        }
        out
    }

    pub fn best_params(&self) -> Vec<BestParams> {
        self.rows
            .iter()
            .map(|r| BestParams {
                model: r.kind,
                support: r.fit.as_ref().map(|f| f.params.support()),
                alpha: r.fit.as_ref().and_then(|f| f.params.alpha()),
                q: r.fit.as_ref().and_then(|f| f.params.q()),
            })
            .collect()
    }

    pub fn best_params_tsv(&self) -> String {
        let mut out = BEST_PARAM_COLUMNS.join("\t");
        out.push('\n');
        for b in self.best_params() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                b.model,
                b.support.map_or("NA".to_string(), |r| r.to_string()),
                cell(b.alpha),
                cell(b.q)
            );
        }
        out
    }
}

/// Index of the smallest score; ties go to fewer parameters, then to the
/// lexicographically smaller kind name, then to the earlier row.
fn argmin(kinds: &[ModelKind], scores: &[Option<f64>]) -> Option<usize> {
    (0..kinds.len())
        .filter(|&i| scores[i].is_some_and(f64::is_finite))
        .min_by(|&a, &b| {
            let (sa, sb) = (scores[a].unwrap(), scores[b].unwrap());
            sa.total_cmp(&sb)
                .then(kinds[a].n_params().cmp(&kinds[b].n_params()))
                .then(kinds[a].as_str().cmp(kinds[b].as_str()))
                .then(a.cmp(&b))
        })
}

/// Fills deltas and weights for one criterion over the rows that have a
/// score.
fn fill_weights(scores: &[Option<f64>]) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let present: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|v| (i, v)))
        .collect();
    let values: Vec<f64> = present.iter().map(|p| p.1).collect();
    let mut d = vec![None; scores.len()];
    let mut w = vec![None; scores.len()];
    if let (Ok(dv), Ok(wv)) = (deltas(&values), weights(&values)) {
        for (k, (i, _)) in present.iter().enumerate() {
            d[*i] = Some(dv[k]);
            w[*i] = Some(wv[k]);
        }
    }
    (d, w)
}

/// Fits every kind in `ensemble` and scores the fits with AICc and BIC.
///
/// A kind that fails to fit keeps its row with the error recorded and no
/// scores; it takes no part in the weights. Duplicate kinds are allowed and
/// produce identical rows.
pub fn select(hist: &RankHistogram, domain: u32, ensemble: &[ModelKind]) -> Result<SelectionTable> {
    if ensemble.is_empty() {
        return Err(Error::InvalidConfig("empty model ensemble".into()));
    }
    let stats = summarize(hist);
    let fits: Vec<Result<FitResult>> = ensemble.par_iter().map(|&k| fit(k, hist, domain)).collect();

    let mut rows = Vec::with_capacity(ensemble.len());
    for (&kind, fitted) in ensemble.iter().zip(fits) {
        let mut row = SelectionRow {
            kind,
            fit: None,
            loglik: None,
            aicc: None,
            delta_aicc: None,
            w_aicc: None,
            bic: None,
            delta_bic: None,
            w_bic: None,
            errors: Vec::new(),
        };
        match fitted {
            Ok(f) => {
                let k = f.n_params;
                // -inf likelihood scores +inf.
                match aicc(f.loglik, k, stats.f0) {
                    Ok(v) => row.aicc = Some(v),
                    Err(e) => row.errors.push(format!("AICc: {e}")),
                }
                match bic(f.loglik, k, stats.f0) {
                    Ok(v) => row.bic = Some(v),
                    Err(e) => row.errors.push(format!("BIC: {e}")),
                }
                row.loglik = Some(f.loglik);
                row.fit = Some(f);
            }
            Err(e) => row.errors.push(e.to_string()),
        }
        rows.push(row);
    }
    if rows.iter().all(|r| r.fit.is_none()) {
        return Err(Error::InvalidConfig(format!(
            "no model could be fitted: {}",
            rows[0].errors.join("; ")
        )));
    }

    let kinds: Vec<ModelKind> = rows.iter().map(|r| r.kind).collect();
    let aicc_scores: Vec<Option<f64>> = rows.iter().map(|r| r.aicc).collect();
    let bic_scores: Vec<Option<f64>> = rows.iter().map(|r| r.bic).collect();
    let (da, wa) = fill_weights(&aicc_scores);
    let (db, wb) = fill_weights(&bic_scores);
    for (i, row) in rows.iter_mut().enumerate() {
        row.delta_aicc = da[i];
        row.w_aicc = wa[i];
        row.delta_bic = db[i];
        row.w_bic = wb[i];
    }

    Ok(SelectionTable {
        dataset: hist.label().to_string(),
        f0: stats.f0,
        domain,
        best_by_aicc: argmin(&kinds, &aicc_scores).map(|i| kinds[i]),
        best_by_bic: argmin(&kinds, &bic_scores).map(|i| kinds[i]),
        rows,
    })
}

/// Log-likelihood of a stored fit on another dataset; `-inf` when that
/// dataset attests a rank beyond the fit's support.
pub fn cross_apply(fit: &FitResult, other: &RankHistogram) -> f64 {
    log_likelihood(&fit.params, &summarize(other))
}

/// Orders kinds by a criterion, best first. Rows without a score go last.
pub fn ranking(table: &SelectionTable, by_bic: bool) -> Vec<ModelKind> {
    let mut rows: Vec<&SelectionRow> = table.rows.iter().collect();
    let score = |r: &SelectionRow| if by_bic { r.bic } else { r.aicc };
    rows.sort_by(|a, b| match (score(a), score(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    rows.into_iter().map(|r| r.kind).collect()
}
