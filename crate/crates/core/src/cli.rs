//! The `rankfit` command line.
//!
//! Every subcommand writes its primary outputs into `--out` together with a
//! `manifest_<command>.json` run manifest listing input digests, parameters
//! and outputs. Nothing time- or host-dependent is written, so reruns with
//! the same inputs and flags are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{diagnose, emit_plot_data, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::estimation::{fit, FitResult};
use crate::histogram::{parse_dataset, summarize, ParseOptions, RankHistogram};
use crate::models::{ModelKind, ModelParams};
use crate::selection::{cross_apply, select};
use crate::simulation::{recovery_experiment, undersampling_probability, SimulationConfig, DEFAULT_SEED};
use crate::DEFAULT_DOMAIN;

#[derive(Debug, Parser)]
#[command(
    name = "rankfit",
    version,
    about = "Fit truncated zeta and geometric models to rank-frequency data"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Dataset: one `label<DELIM>frequency` record per line
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "rankfit-out")]
    pub out: PathBuf,

    /// Size of the rank domain
    #[arg(long = "N", global = true, default_value_t = DEFAULT_DOMAIN)]
    pub domain: u32,

    /// Random seed for simulations
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Rendering of the report printed to stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,

    /// Field delimiter of the input (`tab`, `comma`, or a single character)
    #[arg(long, global = true, default_value = "tab", value_parser = parse_delimiter)]
    pub delimiter: char,

    /// Unit of the frequencies, recorded on the dataset
    #[arg(long, global = true, default_value = "count")]
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summary statistics of a dataset
    Summarize,
    /// Fit one model by maximum likelihood
    Fit {
        #[arg(long, value_parser = parse_kind)]
        model: ModelKind,
    },
    /// Fit an ensemble and rank it by AICc and BIC
    Select {
        /// Comma-separated model kinds
        #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_values_t = ModelKind::ALL.to_vec())]
        ensemble: Vec<ModelKind>,
    },
    /// Scale diagnostics and plot data
    Diagnose {
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Monte Carlo recovery or undersampling experiment
    Simulate(SimulateArgs),
    /// Log-likelihood of a stored fit on another dataset
    CrossApply {
        /// FitResult JSON written by `fit`
        #[arg(long)]
        fit: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config ({seed?, trials, sample_sizes, model}); overrides the model flags
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SimMode::Recovery)]
    pub mode: SimMode,

    /// Generating model kind
    #[arg(long, value_parser = parse_kind, default_value = "geometric1")]
    pub model: ModelKind,

    /// Geometric parameter of the generating model
    #[arg(long)]
    pub q: Option<f64>,

    /// Zeta exponent of the generating model
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Support of a 2-parameter generating model (defaults to N)
    #[arg(long = "R")]
    pub support: Option<u32>,

    /// Comma-separated sample sizes
    #[arg(long, value_delimiter = ',', default_values_t = vec![100u64, 1000, 5000])]
    pub sizes: Vec<u64>,

    #[arg(long, default_value_t = 100)]
    pub trials: u32,

    /// Comma-separated ensemble for recovery runs
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_values_t = ModelKind::ALL.to_vec())]
    pub ensemble: Vec<ModelKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    Recovery,
    Undersampling,
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_delimiter(s: &str) -> std::result::Result<char, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok('\t'),
        "comma" => Ok(','),
        "semicolon" => Ok(';'),
        "space" => Ok(' '),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(format!("delimiter must be a single character, got `{s}`")),
            }
        }
    }
}

/// Provenance of one command run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Result of `cross-apply`. `-inf` is written as the string `"-inf"` with
/// `loglik_is_neg_inf` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossApplyReport {
    pub fit_kind: ModelKind,
    pub params: ModelParams,
    pub dataset: String,
    pub r_max: u32,
    #[serde(with = "crate::jsonfloat")]
    pub loglik: f64,
    pub loglik_is_neg_inf: bool,
}

struct Run {
    command: &'static str,
    out: PathBuf,
    inputs: Vec<InputDigest>,
    parameters: BTreeMap<String, String>,
    outputs: Vec<String>,
    stdout: String,
    warnings: Vec<String>,
}

impl Run {
    fn new(command: &'static str, out: &Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Run {
            command,
            out: out.to_path_buf(),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            stdout: String::new(),
            warnings: Vec::new(),
        })
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| {
            Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.utf8_error()),
            )
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<String> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)?;
        Ok(text)
    }

    fn finish(mut self) -> Result<Outcome> {
        let name = format!("manifest_{}.json", self.command);
        let manifest_path = self.out.join(&name);
        self.outputs.push(manifest_path.display().to_string());
        let manifest = RunManifest {
            command: self.command.to_string(),
            inputs: self.inputs,
            parameters: self.parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
        Ok(Outcome {
            stdout: self.stdout,
            warnings: self.warnings,
            outputs: self.outputs.into_iter().map(PathBuf::from).collect(),
        })
    }
}

/// What a successful run produced.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

fn load_dataset(run: &mut Run, g: &GlobalArgs) -> Result<RankHistogram> {
    let path = g
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--input is required".into()))?;
    let text = run.read_input(path)?;
    let opts = ParseOptions {
        delimiter: g.delimiter,
        label: path
            .file_stem()
            .map_or("dataset".into(), |s| s.to_string_lossy().into_owned()),
        unit: g.unit.clone(),
    };
    let parsed = parse_dataset(&text, &opts)?;
    run.warnings.extend(parsed.warnings.iter().map(|w| w.to_string()));
    run.param("N", g.domain);
    run.param("delimiter", format!("{:?}", g.delimiter));
    run.param("unit", &g.unit);
    Ok(parsed.histogram)
}

fn render_kv(format: Format, value: &serde_json::Value) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = String::new();
            if let Some(map) = value.as_object() {
                for (k, v) in map {
                    let v = match v {
                        serde_json::Value::String(x) => x.clone(),
                        other => other.to_string(),
                    };
                    s.push_str(&format!("{k}\t{v}\n"));
                }
            }
            s
        }
    }
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Summarize => {
            let mut run = Run::new("summarize", &g.out)?;
            let hist = load_dataset(&mut run, g)?;
            let stats = summarize(&hist);
            let json = run.write_json("summary.json", &stats)?;
            run.write("dataset.tsv", &hist.to_canonical_tsv())?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => render_kv(Format::Tsv, &serde_json::to_value(stats)?),
            };
            run.finish()
        }
        Command::Fit { model } => {
            let mut run = Run::new("fit", &g.out)?;
            let hist = load_dataset(&mut run, g)?;
            run.param("model", model);
            let result = fit(*model, &hist, g.domain)?;
            run.warnings.extend(result.warnings.iter().cloned());
            let json = run.write_json(&format!("fit_{model}.json"), &result)?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => format!(
                    "model\tR\talpha\tq\tL\tconverged\n{}\t{}\t{}\t{}\t{}\t{}\n",
                    result.kind,
                    result.params.support(),
                    result.params.alpha().map_or("NA".into(), |a| a.to_string()),
                    result.params.q().map_or("NA".into(), |q| q.to_string()),
                    result.loglik,
                    result.converged
                ),
            };
            run.finish()
        }
        Command::Select { ensemble } => {
            let mut run = Run::new("select", &g.out)?;
            let hist = load_dataset(&mut run, g)?;
            run.param(
                "ensemble",
                ensemble.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","),
            );
            let table = select(&hist, g.domain, ensemble)?;
            for row in &table.rows {
                run.warnings
                    .extend(row.errors.iter().map(|e| format!("{}: {e}", row.kind)));
            }
            let tsv = table.to_tsv();
            run.write("selection.tsv", &tsv)?;
            let json = run.write_json("selection.json", &table)?;
            run.write("best_params.tsv", &table.best_params_tsv())?;
            run.write_json("best_params.json", &table.best_params())?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => tsv,
            };
            run.finish()
        }
        Command::Diagnose { margin } => {
            let mut run = Run::new("diagnose", &g.out)?;
            let hist = load_dataset(&mut run, g)?;
            run.param("margin", margin);
            let mut fits: Vec<FitResult> = Vec::new();
            for kind in ModelKind::ALL {
                match fit(kind, &hist, g.domain) {
                    Ok(f) => fits.push(f),
                    Err(e) => run.warnings.push(format!("{kind}: {e}")),
                }
            }
            let report = diagnose(&hist, &fits, *margin)?;
            let json = run.write_json("diagnostic.json", &report)?;
            let plots = g.out.join("plots");
            for p in emit_plot_data(&hist, &fits, &plots)? {
                run.outputs.push(p.display().to_string());
            }
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => render_kv(Format::Tsv, &serde_json::to_value(&report)?),
            };
            run.finish()
        }
        Command::Simulate(args) => simulate(g, args),
        Command::CrossApply { fit: fit_path } => {
            let mut run = Run::new("cross-apply", &g.out)?;
            let fit_text = run.read_input(fit_path)?;
            let stored: FitResult = serde_json::from_str(&fit_text)?;
            let hist = load_dataset(&mut run, g)?;
            let loglik = cross_apply(&stored, &hist);
            let report = CrossApplyReport {
                fit_kind: stored.kind,
                params: stored.params,
                dataset: hist.label().to_string(),
                r_max: hist.r_max(),
                loglik,
                loglik_is_neg_inf: loglik == f64::NEG_INFINITY,
            };
            let json = run.write_json("cross_apply.json", &report)?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => render_kv(Format::Tsv, &serde_json::to_value(&report)?),
            };
            run.finish()
        }
    }
}

fn simulate(g: &GlobalArgs, args: &SimulateArgs) -> Result<Outcome> {
    let mut run = Run::new("simulate", &g.out)?;
    let mut cfg = match &args.config {
        Some(path) => {
            let text = run.read_input(path)?;
            serde_json::from_str::<SimulationConfig>(&text)?
        }
        None => {
            let shape = if args.model.is_geometric() {
                args.q
                    .ok_or_else(|| Error::InvalidConfig("--q is required for geometric models".into()))?
            } else {
                args.alpha
                    .ok_or_else(|| Error::InvalidConfig("--alpha is required for zeta models".into()))?
            };
            let support = if args.model.has_free_support() {
                args.support.unwrap_or(g.domain)
            } else {
                g.domain
            };
            SimulationConfig {
                seed: DEFAULT_SEED,
                trials: args.trials,
                sample_sizes: args.sizes.clone(),
                model: ModelParams::new(args.model, shape, support, g.domain)?,
            }
        }
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    run.param("seed", cfg.seed);
    run.param("trials", cfg.trials);
    run.param("sample_sizes", format!("{:?}", cfg.sample_sizes));
    run.param("model", serde_json::to_string(&cfg.model)?);

    match args.mode {
        SimMode::Recovery => {
            run.param("mode", "recovery");
            run.param(
                "ensemble",
                args.ensemble.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","),
            );
            let stats = recovery_experiment(&cfg, &args.ensemble)?;
            let json = run.write_json("recovery.json", &stats)?;
            let tsv = stats.to_tsv();
            run.write("recovery.tsv", &tsv)?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => tsv,
            };
        }
        SimMode::Undersampling => {
            run.param("mode", "undersampling");
            let estimates = cfg
                .sample_sizes
                .iter()
                .map(|&n| undersampling_probability(&cfg.model, n, cfg.trials, cfg.seed))
                .collect::<Result<Vec<_>>>()?;
            let json = run.write_json("undersampling.json", &estimates)?;
            let mut tsv = String::from("sample_size\testimate\thalf_width\ttrials\n");
            for e in &estimates {
                tsv.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    e.sample_size, e.estimate, e.half_width, e.trials
                ));
            }
            run.write("undersampling.tsv", &tsv)?;
            run.stdout = match g.format {
                Format::Json => json,
                Format::Tsv => tsv,
            };
        }
    }
    run.finish()
}
