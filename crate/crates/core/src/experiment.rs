//! Seeded trials, batches, q-sweeps and the mutation calibration sweeps.
//!
//! Trial `i` of a batch always runs on the stream seeded by
//! `mix_seed(base_seed, i)`; sweep point `k` uses `mix_seed(base_seed, k)` as
//! its batch base seed. Trials execute on the ambient rayon pool and are
//! reduced in index order, so results do not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{ActionRange, EnvParams};
use crate::error::{Error, Result};
use crate::ga::{self, GAParams, GenerationRecord, StrategyPool};
use crate::rng::{mix_seed, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub trajectory: Vec<GenerationRecord>,
    pub final_pool: StrategyPool,
    pub final_mean: f64,
}

/// Everything needed to run one batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub env: EnvParams,
    pub params: GAParams,
    pub iterations: usize,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.params.validate()?;
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        Ok(())
    }

    fn with_q(&self, q: f64) -> Self {
        Self {
            env: EnvParams { q, ..self.env },
            ..*self
        }
    }

    fn with_seed(&self, base_seed: u64) -> Self {
        Self { base_seed, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub mean_final: f64,
    /// Population variance of the per-trial final means.
    pub variance_final: f64,
    pub trials: Vec<TrialResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub mean_final: f64,
    pub variance_final: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point_at(&self, axis_value: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|pt| (pt.axis_value - axis_value).abs() < 1e-12)
    }
}

/// Reference announcements for the two persistent environments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashTarget {
    /// Every round has `p > 1`: the pool climbs to the ceiling.
    pub q_zero_target: f64,
    /// Every round has `p < 1`: unique equilibrium at the floor.
    pub q_one_target: f64,
}

impl NashTarget {
    pub fn for_actions(actions: &ActionRange) -> Self {
        Self {
            q_zero_target: actions.hi,
            q_one_target: actions.lo,
        }
    }

    pub fn target(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            Ok(self.q_zero_target)
        } else if q == 1.0 {
            Ok(self.q_one_target)
        } else {
            Err(Error::NoNashReference(q))
        }
    }
}

pub fn deviation_from_nash(mean_final: f64, q: f64, targets: &NashTarget) -> Result<f64> {
    Ok((mean_final - targets.target(q)?).abs())
}

pub fn run_trial(
    env: &EnvParams,
    params: &GAParams,
    iterations: usize,
    seed: u64,
) -> Result<TrialResult> {
    if iterations == 0 {
        return Err(Error::invalid("iterations", "must be at least 1"));
    }
    env.validate()?;
    params.validate()?;
    let mut stream = Stream::from_seed(seed);
    let mut pool = ga::init_pool(&env.actions, params.pool_size)?;
    let mut trajectory = Vec::with_capacity(iterations);
    for t in 1..=iterations {
        let (next, record) = ga::step_generation(&pool, env, params, t, &mut stream)?;
        pool = next;
        trajectory.push(record);
    }
    Ok(TrialResult {
        seed,
        trajectory,
        final_mean: pool.mean(),
        final_pool: pool,
    })
}

/// Seed of trial `index` in a batch rooted at `base_seed`.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    mix_seed(base_seed, index as u64)
}

pub fn run_batch(cfg: &BatchConfig) -> Result<BatchResult> {
    cfg.validate()?;
    let trials = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            run_trial(
                &cfg.env,
                &cfg.params,
                cfg.iterations,
                trial_seed(cfg.base_seed, i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let finals: Vec<f64> = trials.iter().map(|t| t.final_mean).collect();
    let (mean_final, variance_final) = mean_and_variance(&finals);
    Ok(BatchResult {
        mean_final,
        variance_final,
        trials,
    })
}

/// Mean and population variance, summed in slice order.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

fn validate_q_values(q_values: &[f64]) -> Result<()> {
    if q_values.is_empty() {
        return Err(Error::invalid("q_grid", "must not be empty"));
    }
    if let Some(q) = q_values.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::invalid(
            "q_grid",
            format!("value {q} outside [0, 1]"),
        ));
    }
    Ok(())
}

fn sorted_points(mut points: Vec<SweepPoint>) -> Vec<SweepPoint> {
    points.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    points
}

/// One batch per q value; point `k` (in input order) is seeded from
/// `mix_seed(base_seed, k)`.
pub fn sweep_q(q_values: &[f64], cfg: &BatchConfig) -> Result<SweepResult> {
    validate_q_values(q_values)?;
    cfg.validate()?;
    let points = q_values
        .par_iter()
        .enumerate()
        .map(|(k, &q)| {
            let batch = run_batch(&cfg.with_q(q).with_seed(mix_seed(cfg.base_seed, k as u64)))?;
            Ok(SweepPoint {
                axis_value: q,
                mean_final: batch.mean_final,
                variance_final: batch.variance_final,
                n_trials: cfg.n_trials,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis_name: "q".to_owned(),
        points: sorted_points(points),
    })
}

/// The zero-iteration curve: every trial plays the initial evenly spaced pool.
pub fn initial_pool_sweep(q_values: &[f64], cfg: &BatchConfig) -> Result<SweepResult> {
    validate_q_values(q_values)?;
    cfg.env.validate()?;
    cfg.params.validate()?;
    let mean = ga::init_pool(&cfg.env.actions, cfg.params.pool_size)?.mean();
    let points = q_values
        .iter()
        .map(|&q| SweepPoint {
            axis_value: q,
            mean_final: mean,
            variance_final: 0.0,
            n_trials: cfg.n_trials,
        })
        .collect();
    Ok(SweepResult {
        axis_name: "q".to_owned(),
        points: sorted_points(points),
    })
}

/// Deviation curves at the two known cases, one per regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurves {
    pub q0: SweepResult,
    pub q1: SweepResult,
}

impl CalibrationCurves {
    /// Point-wise average of the two regime deviations.
    pub fn mean_deviation(&self) -> Vec<(f64, f64)> {
        self.q0
            .points
            .iter()
            .zip(&self.q1.points)
            .map(|(a, b)| (a.axis_value, 0.5 * (a.mean_final + b.mean_final)))
            .collect()
    }
}

/// Runs both known cases for one parameter setting. Returns the deviation
/// points at q = 0 and q = 1.
fn deviation_pair(cfg: &BatchConfig, axis_value: f64) -> Result<(SweepPoint, SweepPoint)> {
    let targets = NashTarget::for_actions(&cfg.env.actions);
    let run = |regime: u64, q: f64| -> Result<SweepPoint> {
        let batch = run_batch(&cfg.with_q(q).with_seed(mix_seed(cfg.base_seed, regime)))?;
        // targets sit on the range boundary, so |mean - target| is also the
        // mean of the per-trial deviations
        Ok(SweepPoint {
            axis_value,
            mean_final: deviation_from_nash(batch.mean_final, q, &targets)?,
            variance_final: batch.variance_final,
            n_trials: cfg.n_trials,
        })
    };
    let (a, b) = rayon::join(|| run(0, 0.0), || run(1, 1.0));
    Ok((a?, b?))
}

fn calibrate_axis(
    axis_name: &str,
    values: &[f64],
    cfg: &BatchConfig,
    apply: impl Fn(&mut GAParams, f64) + Sync,
) -> Result<CalibrationCurves> {
    if values.is_empty() {
        return Err(Error::invalid(
            "grid",
            format!("{axis_name} grid must not be empty"),
        ));
    }
    cfg.validate()?;
    let pairs = values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut point = cfg.with_seed(mix_seed(cfg.base_seed, k as u64));
            apply(&mut point.params, v);
            point.params.validate()?;
            deviation_pair(&point, v)
        })
        .collect::<Result<Vec<_>>>()?;
    let (q0, q1): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(CalibrationCurves {
        q0: SweepResult {
            axis_name: axis_name.to_owned(),
            points: sorted_points(q0),
        },
        q1: SweepResult {
            axis_name: axis_name.to_owned(),
            points: sorted_points(q1),
        },
    })
}

/// Deviation from Nash as a function of the mutation step, with the
/// mutation probability held at `cfg.params.mutation_prob`.
pub fn calibrate_epsilon(eps_values: &[f64], cfg: &BatchConfig) -> Result<CalibrationCurves> {
    calibrate_axis("epsilon", eps_values, cfg, |p, v| p.mutation_step = v)
}

/// Deviation from Nash as a function of the mutation probability, with the
/// step held at `cfg.params.mutation_step`.
pub fn calibrate_rho(rho_values: &[f64], cfg: &BatchConfig) -> Result<CalibrationCurves> {
    calibrate_axis("rho", rho_values, cfg, |p, v| p.mutation_prob = v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub epsilon: f64,
    pub rho: f64,
    pub deviation_q0: f64,
    pub deviation_q1: f64,
    pub deviation_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCalibration {
    pub eps_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    /// Row-major: `cells[i * rho_values.len() + j]` is `(eps_values[i], rho_values[j])`.
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the smallest mean deviation (first on ties).
    pub argmin: usize,
}

impl GridCalibration {
    pub fn best(&self) -> &GridCell {
        &self.cells[self.argmin]
    }
}

/// Brute-force sweep over every (epsilon, rho) pair. Cell `(i, j)` is seeded
/// from `mix_seed(mix_seed(base_seed, i), j)`.
pub fn grid_calibrate(
    eps_values: &[f64],
    rho_values: &[f64],
    cfg: &BatchConfig,
) -> Result<GridCalibration> {
    if eps_values.is_empty() || rho_values.is_empty() {
        return Err(Error::invalid(
            "grid",
            "epsilon and rho grids must not be empty",
        ));
    }
    cfg.validate()?;
    let coords: Vec<(usize, usize)> = (0..eps_values.len())
        .flat_map(|i| (0..rho_values.len()).map(move |j| (i, j)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(i, j)| {
            let mut point = cfg.with_seed(mix_seed(mix_seed(cfg.base_seed, i as u64), j as u64));
            point.params.mutation_step = eps_values[i];
            point.params.mutation_prob = rho_values[j];
            point.params.validate()?;
            let (d0, d1) = deviation_pair(&point, eps_values[i])?;
            Ok(GridCell {
                epsilon: eps_values[i],
                rho: rho_values[j],
                deviation_q0: d0.mean_final,
                deviation_q1: d1.mean_final,
                deviation_mean: 0.5 * (d0.mean_final + d1.mean_final),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmin = 0;
    for (k, cell) in cells.iter().enumerate() {
        if cell.deviation_mean < cells[argmin].deviation_mean {
            argmin = k;
        }
    }
    Ok(GridCalibration {
        eps_values: eps_values.to_vec(),
        rho_values: rho_values.to_vec(),
        cells,
        argmin,
    })
}

/// Iteration budgets standing in for depth of reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelPreset {
    #[serde(rename = "k0")]
    K0,
    #[serde(rename = "k-low")]
    KLow,
    #[serde(rename = "k-mid")]
    KMid,
    #[serde(rename = "k-high")]
    KHigh,
    #[serde(rename = "k-max")]
    KMax,
}

impl LevelPreset {
    pub const ALL: [LevelPreset; 5] = [
        LevelPreset::K0,
        LevelPreset::KLow,
        LevelPreset::KMid,
        LevelPreset::KHigh,
        LevelPreset::KMax,
    ];

    pub fn iterations(self) -> usize {
        match self {
            LevelPreset::K0 => 0,
            LevelPreset::KLow => 10,
            LevelPreset::KMid => 100,
            LevelPreset::KHigh => 1000,
            LevelPreset::KMax => 5000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelPreset::K0 => "k0",
            LevelPreset::KLow => "k-low",
            LevelPreset::KMid => "k-mid",
            LevelPreset::KHigh => "k-high",
            LevelPreset::KMax => "k-max",
        }
    }
}

impl fmt::Display for LevelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LevelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LevelPreset::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                Error::invalid(
                    "level",
                    format!("unknown preset `{s}` (expected k0, k-low, k-mid, k-high or k-max)"),
                )
            })
    }
}

/// `{0, 0.1, ..., 1.0}`.
pub fn default_q_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
