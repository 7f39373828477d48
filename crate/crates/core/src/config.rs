//! Run configuration and the experiment catalogue.
//!
//! A config file is JSON with the same shape as [`Config`]; any subset of
//! fields may be given and the rest fall back to the built-in defaults. A
//! run manifest is also accepted as a config file (its `config` object is
//! used). Precedence is flag > config file > built-in default, with the
//! `GUESSGA_OUT` environment variable as the output-directory fallback below
//! the config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::env::{EnvParams, PayoffModel};
use crate::error::{Error, Result};
use crate::experiment::{default_q_grid, BatchConfig, LevelPreset};
use crate::ga::GAParams;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "results";
pub const OUT_DIR_ENV: &str = "GUESSGA_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub env: EnvParams,
    pub ga: GAParams,
    pub iterations: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub q_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            env: EnvParams {
                q: 0.0,
                ..EnvParams::default()
            },
            ga: GAParams::default(),
            iterations: 100,
            n_trials: 100,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            q_grid: default_q_grid(),
            eps_grid: vec![
                0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0,
            ],
            rho_grid: vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0],
        }
    }
}

/// Command-line overrides; `None` leaves the lower-precedence value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub q: Option<f64>,
    pub iterations: Option<usize>,
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub pool_size: Option<usize>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    pub payoff: Option<PayoffModel>,
    pub out_dir: Option<PathBuf>,
}

impl Config {
    /// Everything except the iteration budget, which depends on the command.
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.ga.validate()?;
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::invalid(
                "q_grid",
                "must be non-empty with values in [0, 1]",
            ));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid(
                "eps_grid",
                "must be non-empty, finite and >= 0",
            ));
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid(
                "rho_grid",
                "must be non-empty with values in [0, 1]",
            ));
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(q) = o.q {
            self.env.q = q;
        }
        if let Some(n) = o.iterations {
            self.iterations = n;
        }
        if let Some(n) = o.n_trials {
            self.n_trials = n;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.pool_size {
            self.ga.pool_size = n;
        }
        if let Some(r) = o.rho {
            self.ga.mutation_prob = r;
        }
        if let Some(e) = o.epsilon {
            self.ga.mutation_step = e;
        }
        if let Some(p) = o.payoff {
            self.ga.payoff_model = p;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
    }

    /// Builds the effective config from defaults, an optional config file,
    /// the output-directory environment fallback and flag overrides.
    pub fn resolve(
        file: Option<&Path>,
        env_out_dir: Option<PathBuf>,
        overrides: &Overrides,
    ) -> Result<Self> {
        let (mut config, file_sets_out_dir) = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                merged_over_defaults(&text, path)?
            }
            None => (Config::default(), false),
        };
        if !file_sets_out_dir {
            if let Some(dir) = env_out_dir {
                config.out_dir = dir;
            }
        }
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    /// Parses config JSON (any subset of fields, or a whole manifest) over
    /// the built-in defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let (config, _) = merged_over_defaults(text, Path::new("<json>"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn batch(&self) -> BatchConfig {
        BatchConfig {
            env: self.env,
            params: self.ga,
            iterations: self.iterations,
            n_trials: self.n_trials,
            base_seed: self.seed,
        }
    }

    /// Canonical JSON with sorted keys.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

/// Returns the merged config and whether the input set `out_dir`.
fn merged_over_defaults(text: &str, source: &Path) -> Result<(Config, bool)> {
    let parse_err = |e| Error::Manifest {
        path: source.to_path_buf(),
        source: e,
    };
    let mut value: Value = serde_json::from_str(text).map_err(parse_err)?;
    // a manifest carries its config under `config`
    if value.get("experiment").is_some() {
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
    }
    let sets_out_dir = value.get("out_dir").is_some();
    let mut merged = serde_json::to_value(Config::default()).expect("default config serializes");
    merge(&mut merged, value);
    let config = serde_json::from_value(merged).map_err(parse_err)?;
    Ok((config, sets_out_dir))
}

/// Recursive object merge; non-object values in `patch` replace `base`.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationAxis {
    Epsilon,
    Rho,
    Grid,
}

impl CalibrationAxis {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationAxis::Epsilon => "epsilon",
            CalibrationAxis::Rho => "rho",
            CalibrationAxis::Grid => "grid",
        }
    }
}

impl fmt::Display for CalibrationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CalibrationAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" => Ok(CalibrationAxis::Epsilon),
            "rho" => Ok(CalibrationAxis::Rho),
            "grid" => Ok(CalibrationAxis::Grid),
            other => Err(Error::invalid(
                "axis",
                format!("unknown axis `{other}` (expected epsilon, rho or grid)"),
            )),
        }
    }
}

/// The experiment a run performs, recorded in its manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Trajectory of the pool mean at `env.q`.
    Converge,
    /// Mean final strategy over `q_grid`.
    SweepQ,
    /// Same data as `SweepQ`, written as the variance profile.
    Variance,
    /// `SweepQ` with the iteration budget of a reasoning level.
    Levelk {
        level: LevelPreset,
    },
    /// `SweepQ` under the winner-take-all payoff.
    AltPayoff,
    Calibrate {
        axis: CalibrationAxis,
    },
}

impl Command {
    /// Writes the settings implied by the command into `config`, so the
    /// manifest records them explicitly.
    pub fn materialize(&self, config: &mut Config) {
        match *self {
            Command::Levelk { level } => config.iterations = level.iterations(),
            Command::AltPayoff => config.ga.payoff_model = PayoffModel::WinnerTakeAll,
            _ => {}
        }
    }
}
