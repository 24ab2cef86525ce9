//! The four-member model ensemble: right-truncated zeta and geometric
//! distributions, with and without a free truncation point.
//!
//! All logarithms are natural. The geometric pmf is written with exponent
//! `r - 1`, i.e. `p(r) = c (1-q)^(r-1)` with `c = q / (1 - (1-q)^R)`, which is
//! the form whose normalizer sums to one over `1..=R`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::SummaryStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Zeta1,
    Zeta2,
    Geometric1,
    Geometric2,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Zeta1,
        ModelKind::Zeta2,
        ModelKind::Geometric1,
        ModelKind::Geometric2,
    ];

    /// Number of free parameters, `K`. The truncation point `R` counts as a
    /// parameter for the 2-parameter kinds.
    pub fn n_params(self) -> u32 {
        match self {
            ModelKind::Zeta1 | ModelKind::Geometric1 => 1,
            ModelKind::Zeta2 | ModelKind::Geometric2 => 2,
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(self, ModelKind::Geometric1 | ModelKind::Geometric2)
    }

    pub fn is_zeta(self) -> bool {
        !self.is_geometric()
    }

    /// Whether `R` is fitted (`true`) or pinned to `N`.
    pub fn has_free_support(self) -> bool {
        self.n_params() == 2
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Zeta1 => "zeta1",
            ModelKind::Zeta2 => "zeta2",
            ModelKind::Geometric1 => "geometric1",
            ModelKind::Geometric2 => "geometric2",
        }
    }

    /// Human-readable name, e.g. "Geometric 2".
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Zeta1 => "Zeta 1",
            ModelKind::Zeta2 => "Zeta 2",
            ModelKind::Geometric1 => "Geometric 1",
            ModelKind::Geometric2 => "Geometric 2",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// A fully specified ensemble member.
///
/// Zeta kinds carry `alpha >= 0`, geometric kinds carry `0 < q < 1`. The
/// support bound satisfies `1 <= R <= N`, and the 1-parameter kinds always
/// have `R = N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    kind: ModelKind,
    shape: f64,
    support: u32,
    domain: u32,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(rename = "R")]
    support: u32,
    #[serde(rename = "N")]
    domain: u32,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let shape = match (raw.kind.is_geometric(), raw.alpha, raw.q) {
            (false, Some(a), None) => a,
            (true, None, Some(q)) => q,
            _ => {
                return Err(Error::InvalidParams(format!(
                    "{} needs exactly the `{}` field",
                    raw.kind,
                    if raw.kind.is_geometric() { "q" } else { "alpha" }
                )))
            }
        };
        ModelParams::new(raw.kind, shape, raw.support, raw.domain)
    }
}

impl From<ModelParams> for RawParams {
    fn from(m: ModelParams) -> Self {
        RawParams {
            kind: m.kind,
            alpha: m.alpha(),
            q: m.q(),
            support: m.support,
            domain: m.domain,
        }
    }
}

impl ModelParams {
    /// `shape` is `alpha` for zeta kinds and `q` for geometric kinds.
    pub fn new(kind: ModelKind, shape: f64, support: u32, domain: u32) -> Result<Self> {
        if support < 1 || support > domain {
            return Err(Error::InvalidParams(format!(
                "need 1 <= R <= N, got R = {support}, N = {domain}"
            )));
        }
        if !kind.has_free_support() && support != domain {
            return Err(Error::InvalidParams(format!("{kind} requires R = N")));
        }
        if kind.is_geometric() {
            if !(shape > 0.0 && shape < 1.0) {
                return Err(Error::InvalidParams(format!("q must lie in (0, 1), got {shape}")));
            }
        } else if !(shape >= 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {shape}"
            )));
        }
        Ok(ModelParams {
            kind,
            shape,
            support,
            domain,
        })
    }

    pub fn zeta1(alpha: f64, domain: u32) -> Result<Self> {
        Self::new(ModelKind::Zeta1, alpha, domain, domain)
    }

    pub fn zeta2(alpha: f64, support: u32, domain: u32) -> Result<Self> {
        Self::new(ModelKind::Zeta2, alpha, support, domain)
    }

    pub fn geometric1(q: f64, domain: u32) -> Result<Self> {
        Self::new(ModelKind::Geometric1, q, domain, domain)
    }

    pub fn geometric2(q: f64, support: u32, domain: u32) -> Result<Self> {
        Self::new(ModelKind::Geometric2, q, support, domain)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// The continuous parameter: `alpha` or `q`.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn alpha(&self) -> Option<f64> {
        self.kind.is_zeta().then_some(self.shape)
    }

    pub fn q(&self) -> Option<f64> {
        self.kind.is_geometric().then_some(self.shape)
    }

    /// Truncation point `R`: the largest rank with non-zero probability.
    pub fn support(&self) -> u32 {
        self.support
    }

    /// Ceiling of the rank domain, `N`.
    pub fn domain(&self) -> u32 {
        self.domain
    }
}

/// Generalized harmonic number `H(α, R) = Σ_{r=1..R} r^-α`.
///
/// Summed from the smallest term up.
pub fn harmonic(alpha: f64, support: u32) -> f64 {
    (1..=support).rev().map(|r| (r as f64).powf(-alpha)).sum()
}

/// Normalizer of the right-truncated geometric pmf, `q / (1 - (1-q)^R)`.
///
/// `(1-q)^R` is formed as `exp(R ln(1-q))`, so `1 - (1-q)^R` is an `expm1`.
pub fn geom_norm(q: f64, support: u32) -> f64 {
    if support == 1 {
        return 1.0;
    }
    q / -(support as f64 * (-q).ln_1p()).exp_m1()
}

/// `ln geom_norm(q, R)` without forming the ratio.
pub fn ln_geom_norm(q: f64, support: u32) -> f64 {
    if support == 1 {
        return 0.0;
    }
    q.ln() - (-(support as f64 * (-q).ln_1p()).exp_m1()).ln()
}

/// Probability of rank `r`; zero outside `1..=R`.
pub fn pmf(m: &ModelParams, r: i64) -> f64 {
    if r < 1 || r > m.support as i64 {
        return 0.0;
    }
    match m.kind {
        ModelKind::Zeta1 | ModelKind::Zeta2 => (r as f64).powf(-m.shape) / harmonic(m.shape, m.support),
        ModelKind::Geometric1 | ModelKind::Geometric2 => {
            geom_norm(m.shape, m.support) * (1.0 - m.shape).powi((r - 1) as i32)
        }
    }
}

/// Log-likelihood of a histogram (through its summary) under `m`.
///
/// Returns `-inf` when the data contain a rank beyond the model's support.
pub fn log_likelihood(m: &ModelParams, s: &SummaryStats) -> f64 {
    if s.r_max > m.support {
        return f64::NEG_INFINITY;
    }
    match m.kind {
        ModelKind::Zeta1 | ModelKind::Zeta2 => {
            let penalty = if m.shape == 0.0 { 0.0 } else { m.shape * s.f_log_r };
            -penalty - s.f0 * harmonic(m.shape, m.support).ln()
        }
        ModelKind::Geometric1 | ModelKind::Geometric2 => {
            s.f0 * ln_geom_norm(m.shape, m.support) + (s.f1 - s.f0) * (-m.shape).ln_1p()
        }
    }
}

/// `E[f(r)] = F0 p(r)`.
pub fn expected_frequency(m: &ModelParams, f0: f64, r: i64) -> f64 {
    f0 * pmf(m, r)
}

/// The geometric pmf rewritten as `c' e^(-β r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialForm {
    pub c_prime: f64,
    pub beta: f64,
}

impl ExponentialForm {
    pub fn eval(&self, r: f64) -> f64 {
        self.c_prime * (-self.beta * r).exp()
    }
}

/// `c (1-q)^(r-1) = c' e^(-β r)` with `c' = c / (1-q)` and `β = -ln(1-q)`.
pub fn to_exponential_form(q: f64, c: f64) -> ExponentialForm {
    ExponentialForm {
        c_prime: c / (1.0 - q),
        beta: -(-q).ln_1p(),
    }
}

/// Probability that a single draw from `m` lands in `1..=r`.
pub(crate) fn cdf_table(m: &ModelParams) -> Vec<f64> {
    let mut acc = 0.0;
    let mut table: Vec<f64> = (1..=m.support as i64)
        .map(|r| {
            acc += pmf(m, r);
            acc
        })
        .collect();
    if let Some(last) = table.last_mut() {
        *last = 1.0;
    }
    table
}
