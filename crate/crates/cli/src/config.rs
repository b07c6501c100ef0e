//! Run configuration, read from TOML. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use spinwire::evolve::{LindbladConfig, PropagatorConfig, MAX_LINDBLAD_SITES};
use spinwire::experiments::MAX_RUN_SITES;
use spinwire::model::{ChainSpec, TieBreak, DEFAULT_TIE_BREAK_FIELD, MAX_THERMAL_CHANNEL};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Transfer,
    ScanLength,
    Thermal,
    Decoherence,
    Hopping,
    Overlap,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transfer => "transfer",
            Experiment::ScanLength => "scan-length",
            Experiment::Thermal => "thermal",
            Experiment::Decoherence => "decoherence",
            Experiment::Hopping => "hopping",
            Experiment::Overlap => "overlap",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Chain parameters. `n_channel` is the channel length `N_ch`; the full
/// register has `N = N_ch + 2` sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_channel: Option<i64>,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<TieBreak>,
    #[serde(default = "default_tie_break_field")]
    pub tie_break_field: f64,
}

fn default_coupling() -> f64 {
    1.0
}

fn default_tie_break_field() -> f64 {
    DEFAULT_TIE_BREAK_FIELD
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { n_channel: None, coupling: 1.0, tie_break: None, tie_break_field: DEFAULT_TIE_BREAK_FIELD }
    }
}

/// Scan lists and run lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    /// Total lengths `N` for `scan-length`.
    #[serde(default = "default_lengths")]
    pub lengths: Vec<i64>,
    /// Temperatures in |J|/k_B for `thermal`.
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    /// Dephasing rates in |J| for `decoherence`.
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Run length in 1/|J|; `4 N / |J|` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Thermal members lighter than this are dropped.
    #[serde(default = "default_weight_cut")]
    pub weight_cut: f64,
}

fn default_lengths() -> Vec<i64> {
    (4..=14).step_by(2).collect()
}

fn default_temperatures() -> Vec<f64> {
    (0..20).map(|i| 0.01 * 1000f64.powf(i as f64 / 19.0)).collect()
}

fn default_gammas() -> Vec<f64> {
    (0..15).map(|i| 0.3 * i as f64 / 14.0).collect()
}

fn default_weight_cut() -> f64 {
    spinwire::model::DEFAULT_WEIGHT_CUT
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lengths: default_lengths(),
            temperatures: default_temperatures(),
            gammas: default_gammas(),
            t_max: None,
            weight_cut: default_weight_cut(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub lindblad: LindbladConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The chain this run uses, validated against the experiment's limits.
    pub fn chain_spec(&self) -> Result<ChainSpec, CliError> {
        let n = self.chain.n_channel.ok_or_else(|| invalid("chain.n_channel is required"))?;
        if n < 1 {
            return Err(invalid(format!("chain.n_channel must be >= 1, got {n}")));
        }
        let mut spec = ChainSpec::new(n as usize, self.chain.coupling).map_err(|e| invalid(e.to_string()))?;
        if let Some(tb) = self.chain.tie_break {
            spec.tie_break = tb;
        }
        spec.tie_break_field = self.chain.tie_break_field;
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.grids.lengths.iter().map(|&n| n as usize).collect()
    }

    /// Checks every field the experiment reads. Runs before any computation.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(invalid(format!("config is for {e}, but the subcommand is {experiment}")));
            }
        }
        self.propagator.validate().map_err(|e| invalid(format!("propagator: {e}")))?;
        self.lindblad.validate().map_err(|e| invalid(format!("lindblad: {e}")))?;
        if let Some(t) = self.grids.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("grids.t_max must be > 0, got {t}")));
            }
        }
        let w = self.grids.weight_cut;
        if !(0.0..1.0).contains(&w) {
            return Err(invalid(format!("grids.weight_cut must be in [0, 1), got {w}")));
        }
        match experiment {
            Experiment::ScanLength => {
                if !(self.chain.coupling != 0.0 && self.chain.coupling.is_finite()) {
                    return Err(invalid("chain.coupling must be finite and non-zero"));
                }
                if self.grids.lengths.is_empty() {
                    return Err(invalid("grids.lengths is empty"));
                }
                for &n in &self.grids.lengths {
                    if n % 2 != 0 || n < 4 || n > MAX_RUN_SITES as i64 {
                        return Err(invalid(format!("grids.lengths must be even and in 4..={MAX_RUN_SITES}, got {n}")));
                    }
                }
            }
            Experiment::Transfer | Experiment::Hopping | Experiment::Overlap => {
                let spec = self.chain_spec()?;
                if spec.n_total() > MAX_RUN_SITES {
                    return Err(invalid(format!("N = {} exceeds {MAX_RUN_SITES}", spec.n_total())));
                }
                if experiment != Experiment::Transfer && spec.n_channel % 2 != 0 {
                    return Err(invalid(format!("{experiment} needs an even chain.n_channel, got {}", spec.n_channel)));
                }
            }
            Experiment::Thermal => {
                let spec = self.chain_spec()?;
                if spec.n_channel > MAX_THERMAL_CHANNEL {
                    return Err(invalid(format!("thermal runs need chain.n_channel <= {MAX_THERMAL_CHANNEL}")));
                }
                if self.grids.temperatures.is_empty() {
                    return Err(invalid("grids.temperatures is empty"));
                }
                if let Some(t) = self.grids.temperatures.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                    return Err(invalid(format!("temperatures must be > 0, got {t}")));
                }
            }
            Experiment::Decoherence => {
                let spec = self.chain_spec()?;
                if spec.n_total() > MAX_LINDBLAD_SITES {
                    return Err(invalid(format!("decoherence runs need N <= {MAX_LINDBLAD_SITES}, got {}", spec.n_total())));
                }
                if self.grids.gammas.is_empty() {
                    return Err(invalid("grids.gammas is empty"));
                }
                if let Some(g) = self.grids.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                    return Err(invalid(format!("gammas must be >= 0, got {g}")));
                }
            }
        }
        Ok(())
    }
}
