//! Scale diagnostics for rank-frequency curves.
//!
//! A geometric pmf is a straight line of slope `ln(1-q)` when plotted as
//! `(r, ln f)`, and a zeta pmf is a straight line of slope `-α` as
//! `(ln r, ln f)`. Fitting a least-squares line in both scales and comparing
//! the coefficients of determination turns that visual test into a verdict.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::histogram::{summarize, RankHistogram};
use crate::models::{expected_frequency, ModelKind};

/// Default r² margin for [`diagnose`].
pub const DEFAULT_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// `(r, f)`
    Normal,
    /// `(r, ln f)`
    LinearLog,
    /// `(ln r, ln f)`
    LogLog,
}

impl Scale {
    pub const ALL: [Scale; 3] = [Scale::Normal, Scale::LinearLog, Scale::LogLog];

    pub fn as_str(self) -> &'static str {
        match self {
            Scale::Normal => "normal",
            Scale::LinearLog => "linear-log",
            Scale::LogLog => "log-log",
        }
    }

    fn point(self, r: f64, f: f64) -> (f64, f64) {
        match self {
            Scale::Normal => (r, f),
            Scale::LinearLog => (r, f.ln()),
            Scale::LogLog => (r.ln(), f.ln()),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "model", rename_all = "lowercase")]
pub enum SeriesSource {
    Observed,
    Expected(ModelKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub scale: Scale,
    pub source: SeriesSource,
    pub points: Vec<(f64, f64)>,
}

fn series_from(scale: Scale, source: SeriesSource, values: impl Iterator<Item = (u32, f64)>) -> PlotSeries {
    PlotSeries {
        scale,
        source,
        points: values
            .filter(|&(_, f)| f > 0.0)
            .map(|(r, f)| scale.point(r as f64, f))
            .collect(),
    }
}

/// Observed frequencies in the requested scale.
pub fn transform_series(hist: &RankHistogram, scale: Scale) -> PlotSeries {
    series_from(
        scale,
        SeriesSource::Observed,
        hist.entries().iter().map(|e| (e.rank, e.frequency)),
    )
}

/// Expected frequencies `F0 p(r)` of a fitted model over `r = 1..=R`.
pub fn expected_series(fit: &FitResult, f0: f64, scale: Scale) -> PlotSeries {
    let m = fit.params;
    series_from(
        scale,
        SeriesSource::Expected(fit.kind),
        (1..=m.support()).map(|r| (r, expected_frequency(&m, f0, r as i64))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Unweighted ordinary least squares through `series.points`.
///
/// When every `y` is equal the fit is exact: `r2 = 1` and the slope is 0.
pub fn slope_fit(series: &PlotSeries) -> Result<LineFit> {
    let pts = &series.points;
    let n = pts.len() as f64;
    let distinct = {
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return Err(Error::TooFewPoints { need: 2, got: distinct });
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = pts.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(LineFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExponentialLike,
    PowerLawLike,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub linlog_slope: f64,
    pub linlog_r2: f64,
    pub loglog_slope: f64,
    pub loglog_r2: f64,
    /// `ln(1 - q̂)` of the geometric fit used.
    pub geometric_slope_prediction: f64,
    /// `-α̂` of the zeta fit used.
    pub zeta_slope_prediction: f64,
    pub geometric_model: ModelKind,
    pub zeta_model: ModelKind,
    pub margin: f64,
    pub verdict: Verdict,
}

/// Regresses the observed curve in linear-log and log-log scale and compares
/// the straightness of the two.
///
/// The verdict is exponential-like when the linear-log r² beats the log-log
/// r² by more than `margin`, power-law-like in the opposite case, and
/// inconclusive otherwise. Slope predictions come from the highest-likelihood
/// geometric and zeta fits in `fits` (the earlier one on ties).
pub fn diagnose(hist: &RankHistogram, fits: &[FitResult], margin: f64) -> Result<DiagnosticReport> {
    let best = |geometric: bool| {
        fits.iter()
            .filter(|f| f.kind.is_geometric() == geometric)
            .reduce(|a, b| if b.loglik > a.loglik { b } else { a })
            .ok_or(Error::MissingFits)
    };
    let geo = best(true)?;
    let zeta = best(false)?;
    let lin = slope_fit(&transform_series(hist, Scale::LinearLog))?;
    let log = slope_fit(&transform_series(hist, Scale::LogLog))?;
    let verdict = if lin.r2 > log.r2 + margin {
        Verdict::ExponentialLike
    } else if log.r2 > lin.r2 + margin {
        Verdict::PowerLawLike
    } else {
        Verdict::Inconclusive
    };
    Ok(DiagnosticReport {
        linlog_slope: lin.slope,
        linlog_r2: lin.r2,
        loglog_slope: log.slope,
        loglog_r2: log.r2,
        geometric_slope_prediction: (-geo.params.shape()).ln_1p(),
        zeta_slope_prediction: -zeta.params.shape(),
        geometric_model: geo.kind,
        zeta_model: zeta.kind,
        margin,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub file: String,
    pub scale: Scale,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesManifest {
    pub series: Vec<SeriesEntry>,
}

/// File name of the series manifest written by [`emit_plot_data`].
pub const SERIES_MANIFEST: &str = "series_manifest.json";

fn series_tsv(series: &PlotSeries) -> String {
    let mut out = String::from("x\ty\n");
    for (x, y) in &series.points {
        out.push_str(&format!("{x}\t{y}\n"));
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes one `x<TAB>y` TSV per (scale, source) into `dir` plus
/// [`SERIES_MANIFEST`]. Returns every written path, manifest last.
///
/// Expected series are named `expected_<kind>_<scale>.tsv`; a kind fitted
/// more than once gets a `_<index>` suffix from its position in `fits`.
pub fn emit_plot_data(hist: &RankHistogram, fits: &[FitResult], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let f0 = summarize(hist).f0;
    let mut written = Vec::new();
    let mut entries = Vec::new();

    for scale in Scale::ALL {
        let name = format!("observed_{scale}.tsv");
        let path = dir.join(&name);
        write(&path, &series_tsv(&transform_series(hist, scale)))?;
        written.push(path);
        entries.push(SeriesEntry {
            file: name,
            scale,
            source: "observed".into(),
            model: None,
        });
    }

    for (i, fit) in fits.iter().enumerate() {
        let repeated = fits[..i].iter().any(|f| f.kind == fit.kind);
        for scale in Scale::ALL {
            let name = if repeated {
                format!("expected_{}_{scale}_{i}.tsv", fit.kind)
            } else {
                format!("expected_{}_{scale}.tsv", fit.kind)
            };
            let path = dir.join(&name);
            write(&path, &series_tsv(&expected_series(fit, f0, scale)))?;
            written.push(path);
            entries.push(SeriesEntry {
                file: name,
                scale,
                source: "expected".into(),
                model: Some(fit.kind),
            });
        }
    }

    let manifest = dir.join(SERIES_MANIFEST);
    write(
        &manifest,
        &serde_json::to_string_pretty(&SeriesManifest { series: entries })?,
    )?;
    written.push(manifest);
    Ok(written)
}
