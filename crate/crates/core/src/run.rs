//! Executes a [`Command`] and persists its CSVs and manifest.
//!
//! All results are computed before anything touches the disk; files are
//! then written atomically, CSVs first and the manifest last.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{CalibrationAxis, Command, Config};
use crate::error::{Error, Result};
use crate::experiment::{self, CalibrationCurves, LevelPreset};
use crate::report::{self, format_sig6, RunManifest};

/// Rendered output of one command, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Base name shared by the outputs; the manifest is `<stem>.manifest.json`.
    pub stem: String,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
    /// One-line human summary.
    pub summary: String,
}

impl Outcome {
    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.stem)
    }
}

/// Runs `command` with `config` (after materializing the command's implied
/// settings) and renders the result files.
pub fn execute(command: &Command, config: &Config) -> Result<(Config, Outcome)> {
    let mut config = config.clone();
    command.materialize(&mut config);
    config.validate()?;
    let batch = config.batch();

    let outcome = match *command {
        Command::Converge => {
            let result = experiment::run_batch(&batch)?;
            let stem = format!("converge_q{}", format_sig6(config.env.q));
            Outcome {
                files: vec![(
                    format!("{stem}.csv"),
                    report::trajectory_csv(&result.trials)?,
                )],
                summary: format!(
                    "q = {}: mean final strategy {} (variance {}) over {} trials",
                    format_sig6(config.env.q),
                    format_sig6(result.mean_final),
                    format_sig6(result.variance_final),
                    config.n_trials
                ),
                stem,
            }
        }
        Command::SweepQ | Command::Variance | Command::AltPayoff | Command::Levelk { .. } => {
            let (stem, sweep) = match *command {
                Command::Levelk {
                    level: LevelPreset::K0,
                } => (
                    "levelk_k0".to_owned(),
                    experiment::initial_pool_sweep(&config.q_grid, &batch)?,
                ),
                Command::Levelk { level } => (
                    format!("levelk_{level}"),
                    experiment::sweep_q(&config.q_grid, &batch)?,
                ),
                Command::Variance => (
                    format!("variance_it{}", config.iterations),
                    experiment::sweep_q(&config.q_grid, &batch)?,
                ),
                Command::AltPayoff => (
                    format!("alt_payoff_it{}", config.iterations),
                    experiment::sweep_q(&config.q_grid, &batch)?,
                ),
                _ => (
                    format!("sweep_q_it{}", config.iterations),
                    experiment::sweep_q(&config.q_grid, &batch)?,
                ),
            };
            let summary = sweep
                .points
                .iter()
                .map(|pt| {
                    format!(
                        "{}:{}",
                        format_sig6(pt.axis_value),
                        format_sig6(pt.mean_final)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ");
            Outcome {
                files: vec![(format!("{stem}.csv"), report::sweep_csv(&sweep)?)],
                summary: format!("mean final strategy by q: {summary}"),
                stem,
            }
        }
        Command::Calibrate { axis } => calibrate(axis, &config)?,
    };
    Ok((config, outcome))
}

fn curves_outcome(stem: String, curves: &CalibrationCurves) -> Result<Outcome> {
    let (best_axis, best_dev) =
        curves
            .mean_deviation()
            .into_iter()
            .fold((f64::NAN, f64::INFINITY), |acc, (x, d)| {
                if d < acc.1 {
                    (x, d)
                } else {
                    acc
                }
            });
    Ok(Outcome {
        files: vec![
            (format!("{stem}_q0.csv"), report::sweep_csv(&curves.q0)?),
            (format!("{stem}_q1.csv"), report::sweep_csv(&curves.q1)?),
        ],
        summary: format!(
            "minimum mean deviation {} at {} = {}",
            format_sig6(best_dev),
            curves.q0.axis_name,
            format_sig6(best_axis)
        ),
        stem,
    })
}

fn calibrate(axis: CalibrationAxis, config: &Config) -> Result<Outcome> {
    let batch = config.batch();
    match axis {
        CalibrationAxis::Epsilon => curves_outcome(
            "calibrate_epsilon".to_owned(),
            &experiment::calibrate_epsilon(&config.eps_grid, &batch)?,
        ),
        CalibrationAxis::Rho => curves_outcome(
            "calibrate_rho".to_owned(),
            &experiment::calibrate_rho(&config.rho_grid, &batch)?,
        ),
        CalibrationAxis::Grid => {
            let grid = experiment::grid_calibrate(&config.eps_grid, &config.rho_grid, &batch)?;
            let best = grid.best();
            Ok(Outcome {
                stem: "calibrate_grid".to_owned(),
                files: vec![("calibrate_grid.csv".to_owned(), report::grid_csv(&grid)?)],
                summary: format!(
                    "argmin epsilon = {}, rho = {} (mean deviation {})",
                    format_sig6(best.epsilon),
                    format_sig6(best.rho),
                    format_sig6(best.deviation_mean)
                ),
            })
        }
    }
}

/// Executes `command` and writes its CSVs plus a manifest into `out_dir`.
/// Returns the manifest path and the outcome.
pub fn run_to_dir(
    command: &Command,
    config: &Config,
    out_dir: &Path,
) -> Result<(PathBuf, Outcome)> {
    let (config, outcome) = execute(command, config)?;
    let path = write_outcome(command, config, &outcome, out_dir)?;
    Ok((path, outcome))
}

fn write_outcome(
    command: &Command,
    mut config: Config,
    outcome: &Outcome,
    out_dir: &Path,
) -> Result<PathBuf> {
    config.out_dir = out_dir.to_path_buf();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, contents) in &outcome.files {
        report::write_atomic(&out_dir.join(name), contents)?;
    }
    let manifest = RunManifest::new(
        *command,
        config,
        outcome.files.iter().map(|(n, _)| n.clone()).collect(),
    );
    let manifest_path = out_dir.join(outcome.manifest_name());
    report::write_manifest(&manifest, &manifest_path)?;
    Ok(manifest_path)
}

/// Re-runs the experiment described by a manifest into `out_dir`, or into
/// the manifest's own `out_dir` when none is given.
pub fn rerun(manifest_path: &Path, out_dir: Option<&Path>) -> Result<(PathBuf, Outcome)> {
    let manifest = RunManifest::load(manifest_path)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.config.out_dir.clone());
    let (config, outcome) = execute(&manifest.experiment, &manifest.config)?;
    if config != manifest.config {
        return Err(Error::Validation(
            "manifest config is not fully materialized for its command".to_owned(),
        ));
    }
    let produced: Vec<&str> = outcome.files.iter().map(|(n, _)| n.as_str()).collect();
    if manifest.outputs != produced {
        return Err(Error::Validation(format!(
            "manifest lists outputs {:?} but the run produces {produced:?}",
            manifest.outputs
        )));
    }
    let path = write_outcome(&manifest.experiment, config, &outcome, &dir)?;
    Ok((path, outcome))
}
