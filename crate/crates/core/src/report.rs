//! Figure-ready CSV output and run manifests.
//!
//! CSVs use LF line endings and six significant digits (`%g` style), so
//! identical inputs give identical bytes. Manifests are canonical JSON with
//! sorted keys and every parameter materialized.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Command, Config};
use crate::error::{Error, Result};
use crate::experiment::{GridCalibration, SweepResult, TrialResult};

pub const TRAJECTORY_HEADER: &str = "iteration,mean_over_trials,std_over_trials,min,max";
pub const SWEEP_HEADER: &str = "axis_value,mean_final,variance_final,n_trials";
pub const GRID_HEADER: &str = "epsilon,rho,deviation_q0,deviation_q1,deviation_mean";

/// Formats `x` with six significant digits, like C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Per-iteration statistics of the pool mean across trials.
pub fn trajectory_csv(trials: &[TrialResult]) -> Result<String> {
    let first = trials.first().ok_or(Error::EmptyResults("trajectory"))?;
    let iterations = first.trajectory.len();
    if trials.iter().any(|t| t.trajectory.len() != iterations) {
        return Err(Error::invalid(
            "trials",
            "trajectories have different lengths",
        ));
    }
    let n = trials.len() as f64;
    let mut out = String::with_capacity(48 * (iterations + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for t in 0..iterations {
        let column = trials.iter().map(|tr| tr.trajectory[t].pool_mean);
        let mean = column.clone().sum::<f64>() / n;
        let var = column.clone().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let min = column.clone().fold(f64::INFINITY, f64::min);
        let max = column.fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            first.trajectory[t].iteration,
            format_sig6(mean),
            format_sig6(var.sqrt()),
            format_sig6(min),
            format_sig6(max)
        );
    }
    Ok(out)
}

pub fn sweep_csv(sweep: &SweepResult) -> Result<String> {
    if sweep.points.is_empty() {
        return Err(Error::EmptyResults("sweep"));
    }
    let mut points = sweep.points.clone();
    points.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for pt in &points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_sig6(pt.axis_value),
            format_sig6(pt.mean_final),
            format_sig6(pt.variance_final),
            pt.n_trials
        );
    }
    Ok(out)
}

pub fn grid_csv(grid: &GridCalibration) -> Result<String> {
    if grid.cells.is_empty() {
        return Err(Error::EmptyResults("grid"));
    }
    let mut out = String::new();
    out.push_str(GRID_HEADER);
    out.push('\n');
    for c in &grid.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_sig6(c.epsilon),
            format_sig6(c.rho),
            format_sig6(c.deviation_q0),
            format_sig6(c.deviation_q1),
            format_sig6(c.deviation_mean)
        );
    }
    Ok(out)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_trajectory_csv(trials: &[TrialResult], path: &Path) -> Result<()> {
    write_atomic(path, &trajectory_csv(trials)?)
}

pub fn write_sweep_csv(sweep: &SweepResult, path: &Path) -> Result<()> {
    write_atomic(path, &sweep_csv(sweep)?)
}

pub fn write_grid_csv(grid: &GridCalibration, path: &Path) -> Result<()> {
    write_atomic(path, &grid_csv(grid)?)
}

/// Everything needed to re-run an experiment bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    /// UTC, RFC 3339.
    pub created_at: String,
    pub experiment: Command,
    pub config: Config,
    /// CSV files written next to the manifest.
    pub outputs: Vec<String>,
    /// How `variance_final` is computed.
    pub variance: String,
}

pub const VARIANCE_DEFINITION: &str = "population";

impl RunManifest {
    pub fn new(experiment: Command, config: Config, outputs: Vec<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            experiment,
            config,
            outputs,
            variance: VARIANCE_DEFINITION.to_owned(),
        }
    }

    /// Canonical JSON: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Validation(e.to_string()))?;
        let mut s =
            serde_json::to_string_pretty(&value).map_err(|e| Error::Validation(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Strict load: every field must be present.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            source: e,
        })?;
        manifest
            .config
            .validate()
            .map_err(|e| Error::Validation(e.to_string()))?;
        if manifest.variance != VARIANCE_DEFINITION {
            return Err(Error::Validation(format!(
                "unsupported variance definition `{}`",
                manifest.variance
            )));
        }
        Ok(manifest)
    }
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    write_atomic(path, &manifest.to_canonical_json()?)
}
