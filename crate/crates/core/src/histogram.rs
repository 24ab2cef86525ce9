//! Rank-frequency histograms and their summary statistics.
//!
//! A [`RankHistogram`] stores one positive frequency per attested category,
//! ranked from most to least frequent. Frequencies are real numbers: counts
//! adjusted for genealogical or areal bias are routinely non-integer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One ranked category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub rank: u32,
    pub category: String,
    pub frequency: f64,
}

/// Observed frequency per rank, `f(r)` for `r = 1..=r_max`.
///
/// Invariants, checked on construction: ranks are exactly `1..=r_max`, every
/// frequency is finite and strictly positive, and frequencies never increase
/// with rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankHistogram {
    label: String,
    unit: String,
    entries: Vec<Entry>,
}

/// Non-fatal conditions noticed while building a histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ParseWarning {
    /// Several categories share a frequency; their relative ranks follow
    /// input order.
    Tie {
        frequency: f64,
        ranks: Vec<u32>,
        categories: Vec<String>,
    },
    /// A record with frequency zero was dropped.
    ZeroFrequencyDropped { record: usize, category: String },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::Tie {
                frequency,
                ranks,
                categories,
            } => write!(
                f,
                "tie at frequency {frequency}: categories {} assigned ranks {:?} by input order",
                categories.join(", "),
                ranks
            ),
            ParseWarning::ZeroFrequencyDropped { record, category } => {
                write!(f, "record {record}: zero frequency for `{category}`, dropped")
            }
        }
    }
}

/// A parsed dataset together with the warnings raised while ranking it.
#[derive(Debug, Clone)]
pub struct ParsedDataset {
    pub histogram: RankHistogram,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub delimiter: char,
    /// Dataset identifier stored on the histogram.
    pub label: String,
    /// What the frequencies count ("languages", "genera", ...).
    pub unit: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delimiter: '\t',
            label: "dataset".to_string(),
            unit: "count".to_string(),
        }
    }
}

/// Header line of the canonical persisted form.
pub const CANONICAL_HEADER: &str = "label\tfrequency";

impl RankHistogram {
    /// Builds a histogram from already ranked entries, validating every
    /// invariant.
    pub fn new(label: impl Into<String>, unit: impl Into<String>, entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut prev = f64::INFINITY;
        for (i, e) in entries.iter().enumerate() {
            let expected = i as u32 + 1;
            if e.rank != expected {
                return Err(Error::InvalidHistogram(format!(
                    "rank {} at position {} (expected {expected})",
                    e.rank,
                    i + 1
                )));
            }
            if !e.frequency.is_finite() || e.frequency <= 0.0 {
                return Err(Error::InvalidHistogram(format!(
                    "rank {} has non-positive frequency {}",
                    e.rank, e.frequency
                )));
            }
            if e.frequency > prev {
                return Err(Error::InvalidHistogram(format!(
                    "frequency increases at rank {} ({} > {prev})",
                    e.rank, e.frequency
                )));
            }
            prev = e.frequency;
        }
        Ok(RankHistogram {
            label: label.into(),
            unit: unit.into(),
            entries,
        })
    }

    /// Ranks unordered `(category, frequency)` records.
    ///
    /// Records are sorted by descending frequency with a stable sort, so tied
    /// categories keep their input order; each tie group produces a warning.
    /// Zero frequencies are dropped with a warning. Record numbers in errors
    /// and warnings are 1-based positions in `records`.
    pub fn from_records(
        label: impl Into<String>,
        unit: impl Into<String>,
        records: Vec<(String, f64)>,
    ) -> Result<ParsedDataset> {
        let numbered = records
            .into_iter()
            .enumerate()
            .map(|(i, (c, f))| (i + 1, c, f))
            .collect();
        Self::rank_records(label.into(), unit.into(), numbered)
    }

    /// Convenience constructor from bare frequencies; category names are the
    /// 1-based input positions. Ties and zeros are handled as in
    /// [`RankHistogram::from_records`] but the warnings are discarded.
    pub fn from_frequencies(label: impl Into<String>, unit: impl Into<String>, freqs: &[f64]) -> Result<Self> {
        let records = freqs
            .iter()
            .enumerate()
            .map(|(i, &f)| ((i + 1).to_string(), f))
            .collect();
        Ok(Self::from_records(label, unit, records)?.histogram)
    }

    fn rank_records(label: String, unit: String, records: Vec<(usize, String, f64)>) -> Result<ParsedDataset> {
        let mut warnings = Vec::new();
        let mut kept = Vec::with_capacity(records.len());
        for (record, category, frequency) in records {
            if frequency.is_nan() || frequency.is_infinite() {
                return Err(Error::NonFiniteFrequency { record });
            }
            if frequency < 0.0 {
                return Err(Error::NegativeFrequency {
                    record,
                    value: frequency,
                });
            }
            if frequency == 0.0 {
                warnings.push(ParseWarning::ZeroFrequencyDropped { record, category });
                continue;
            }
            kept.push((category, frequency));
        }
        if kept.is_empty() {
            return Err(Error::EmptyInput);
        }

        // Vec::sort_by is stable.
        kept.sort_by(|a, b| b.1.total_cmp(&a.1));

        let entries: Vec<Entry> = kept
            .into_iter()
            .enumerate()
            .map(|(i, (category, frequency))| Entry {
                rank: i as u32 + 1,
                category,
                frequency,
            })
            .collect();

        for group in entries.chunk_by(|a, b| a.frequency == b.frequency) {
            if group.len() > 1 {
                warnings.push(ParseWarning::Tie {
                    frequency: group[0].frequency,
                    ranks: group.iter().map(|e| e.rank).collect(),
                    categories: group.iter().map(|e| e.category.clone()).collect(),
                });
            }
        }

        Ok(ParsedDataset {
            histogram: RankHistogram::new(label, unit, entries)?,
            warnings,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Number of attested ranks.
    pub fn r_max(&self) -> u32 {
        self.entries.len() as u32
    }

    /// Frequencies in rank order.
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.frequency)
    }

    /// `f(r)`, or `None` outside `1..=r_max`.
    pub fn frequency(&self, rank: u32) -> Option<f64> {
        rank.checked_sub(1)
            .and_then(|i| self.entries.get(i as usize))
            .map(|e| e.frequency)
    }

    /// Canonical persisted form: tab-separated, `label<TAB>frequency`
    /// header, LF line endings, rows in rank order. Frequencies are written
    /// with the shortest representation that parses back to the same `f64`.
    pub fn to_canonical_tsv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.entries.len() + 1));
        out.push_str(CANONICAL_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&e.category);
            out.push('\t');
            out.push_str(&e.frequency.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses a delimited `label, frequency` document into a ranked histogram.
///
/// Blank lines and lines starting with `#` are ignored. The first remaining
/// line is treated as a header when its frequency field is not numeric.
pub fn parse_dataset(text: &str, options: &ParseOptions) -> Result<ParsedDataset> {
    let mut records = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let record = lineno + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(options.delimiter).collect();
        if fields.len() != 2 {
            return Err(Error::FieldCount {
                record,
                delimiter: options.delimiter,
                found: fields.len(),
            });
        }
        let value = fields[1].trim();
        let is_header = first && value.parse::<f64>().is_err();
        first = false;
        if is_header {
            continue;
        }
        let frequency: f64 = value.parse().map_err(|_| Error::NonNumericFrequency {
            record,
            value: value.to_string(),
        })?;
        records.push((record, fields[0].to_string(), frequency));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    RankHistogram::rank_records(options.label.clone(), options.unit.clone(), records)
}

/// Power sums of a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    /// Total frequency, `Σ f(r)`.
    #[serde(rename = "F0")]
    pub f0: f64,
    /// `Σ f(r) r`.
    #[serde(rename = "F1")]
    pub f1: f64,
    /// `Σ f(r) ln r`.
    #[serde(rename = "FlogR")]
    pub f_log_r: f64,
    /// `F1 / F0`.
    pub mean_rank: f64,
    pub r_max: u32,
}

pub fn summarize(hist: &RankHistogram) -> SummaryStats {
    let (mut f0, mut f1, mut f_log_r) = (0.0, 0.0, 0.0);
    for e in hist.entries() {
        let r = e.rank as f64;
        f0 += e.frequency;
        f1 += e.frequency * r;
        f_log_r += e.frequency * r.ln();
    }
    SummaryStats {
        f0,
        f1,
        f_log_r,
        mean_rank: f1 / f0,
        r_max: hist.r_max(),
    }
}

/// `F_x = Σ f(r) r^x`.
pub fn moment(hist: &RankHistogram, x: f64) -> f64 {
    hist.entries()
        .iter()
        .map(|e| {
            let r = e.rank as f64;
            // Keep x = 0 and x = 1 bit-identical with `summarize`.
            let w = if x == 0.0 {
                1.0
            } else if x == 1.0 {
                r
            } else {
                r.powf(x)
            };
            e.frequency * w
        })
        .sum()
}
