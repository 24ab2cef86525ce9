//! Fitting right-truncated zeta and geometric distributions to rank-frequency
//! data.
//!
//! A rank-frequency dataset assigns each observed category a frequency and
//! ranks the categories from most to least frequent. This crate fits four
//! candidate models to such data by maximum likelihood:
//!
//! | kind         | pmf on `1..=R`                         | free parameters |
//! |--------------|----------------------------------------|-----------------|
//! | `zeta1`      | `r^-α / H(α, N)`                       | `α`             |
//! | `zeta2`      | `r^-α / H(α, R)`                       | `α`, `R`        |
//! | `geometric1` | `q (1-q)^(r-1) / (1 - (1-q)^N)`        | `q`             |
//! | `geometric2` | `q (1-q)^(r-1) / (1 - (1-q)^R)`        | `q`, `R`        |
//!
//! and ranks them with AICc and BIC weights. The [`diagnostics`] module turns
//! the usual "straight line on a log scale" eyeball test into regressions,
//! and [`simulation`] provides seeded Monte Carlo experiments for parameter
//! recovery and undersampling.
//!
//! ```
//! use rankfit::{histogram::RankHistogram, selection::select, models::ModelKind};
//!
//! let hist = RankHistogram::from_frequencies("demo", "items", &[40.0, 22.0, 13.0, 8.0, 4.0, 2.0, 1.0])?;
//! let table = select(&hist, 24, &ModelKind::ALL)?;
//! assert!(table.best_by_bic.unwrap().is_geometric());
//! # Ok::<(), rankfit::Error>(())
//! ```

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod histogram;
pub mod jsonfloat;
pub mod models;
pub mod optimize;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};

/// Size of the rank domain used when none is given: the 24 orderings of
/// four noun-phrase constituents.
pub const DEFAULT_DOMAIN: u32 = 24;
