//! Run configuration: command-line flags over a JSON config file over
//! defaults.

use std::path::PathBuf;

use christoffel::applications::SynthSpec;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Flags shared by every command.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// JSON file with default values for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input CSV (repeatable; `match` takes two)
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Output prefix; writes <prefix>.json and <prefix>.csv
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Fitted model JSON from `fit`
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// CSV of evaluation points
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated decreasing distances for `schedule`
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Map the bounding box to [-1, 1]^p before fitting (default)
    #[arg(long, conflicts_with = "no_standardize")]
    pub standardize: bool,
    #[arg(long)]
    pub no_standardize: bool,
    /// none, auto or a nonnegative ridge value
    #[arg(long)]
    pub ridge: Option<String>,
    /// Lattice "xmin:xmax:n[,ymin:ymax:n]"
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Reference box "lo:hi[,lo:hi...]"
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Diameter of the support (or an upper bound)
    #[arg(long)]
    pub diam: Option<f64>,
    /// Volume of the support (or an upper bound)
    #[arg(long)]
    pub volume: Option<f64>,
    /// Density lower bound; selects the weighted threshold
    #[arg(long)]
    pub wmin: Option<f64>,
    /// Threshold override for `support`
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Label column, by 0-based index or header name
    #[arg(long)]
    pub label_column: Option<String>,
    /// Score CSV for `aupr` (repeatable)
    #[arg(long)]
    pub scores: Vec<PathBuf>,
    /// KDE bandwidth
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Scoring method: christoffel or kde
    #[arg(long)]
    pub method: Option<String>,
    /// Generator kind for `generate`
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of points for `generate`
    #[arg(long)]
    pub n: Option<usize>,
    /// Also write an affinely transformed, shuffled copy (`generate`)
    #[arg(long)]
    pub affine_shuffle: bool,
    /// Largest degree tried by `schedule`
    #[arg(long)]
    pub d_cap: Option<u32>,
}

/// Fully resolved configuration, echoed into every output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub input: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub degree: Option<u32>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub standardize: Option<bool>,
    pub ridge: Option<String>,
    pub grid: Option<String>,
    #[serde(rename = "box")]
    pub bounds: Option<String>,
    pub dim: Option<usize>,
    pub diam: Option<f64>,
    pub volume: Option<f64>,
    pub wmin: Option<f64>,
    pub alpha: Option<f64>,
    pub label_column: Option<String>,
    pub scores: Vec<PathBuf>,
    pub sigma: Option<f64>,
    pub method: Option<String>,
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub affine_shuffle: bool,
    pub d_cap: Option<u32>,
    /// Generator parameters; config file only.
    pub generator: Option<SynthSpec>,
}

macro_rules! overlay {
    ($cfg:ident, $flags:ident, $($field:ident),*) => {
        $( if $flags.$field.is_some() { $cfg.$field = $flags.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags) -> CliResult<Self> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| CliError::usage(format!("{}: invalid config: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.command = command.to_string();
        if !flags.input.is_empty() {
            cfg.input = flags.input.clone();
        }
        if !flags.scores.is_empty() {
            cfg.scores = flags.scores.clone();
        }
        overlay!(
            cfg, flags, output, model, points, degree, delta, deltas, seed, ridge, grid, bounds, dim, diam, volume,
            wmin, alpha, label_column, sigma, method, kind, n, d_cap
        );
        if flags.standardize {
            cfg.standardize = Some(true);
        }
        if flags.no_standardize {
            cfg.standardize = Some(false);
        }
        if flags.affine_shuffle {
            cfg.affine_shuffle = true;
        }
        cfg.seed.get_or_insert(0);
        cfg.standardize.get_or_insert(true);
        cfg.ridge.get_or_insert_with(|| "auto".into());
        Ok(cfg)
    }

    pub fn require_degree(&self) -> CliResult<u32> {
        self.degree.ok_or_else(|| CliError::usage(format!("{} requires --degree", self.command)))
    }

    pub fn standardize(&self) -> bool {
        self.standardize.unwrap_or(true)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
