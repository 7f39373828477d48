//! Evolutionary learning in p-guessing games with unstable regimes.
//!
//! A single learner keeps a pool of scalar announcements. Each generation a
//! game multiplier `p` is drawn (below 1 with probability `q`, above 1
//! otherwise), every announcement is scored against the rest of the pool,
//! and a genetic algorithm breeds the next pool. Batches of seeded trials
//! trace how the learned strategy depends on `q` and on the iteration
//! budget.
//!
//! Modules, bottom-up: [`rng`] (deterministic streams), [`env`] (regime
//! draw and payoffs), [`ga`] (the engine), [`experiment`] (trials, batches,
//! sweeps, calibration), [`report`] (CSV and manifests), [`config`] and
//! [`run`] (what the `guessga` binary drives).

pub mod config;
pub mod env;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod report;
pub mod rng;
pub mod run;

pub use config::{CalibrationAxis, Command, Config, Overrides};
pub use env::{ActionRange, EnvParams, PayoffModel};
pub use error::{Error, Result};
pub use experiment::{BatchConfig, LevelPreset, SweepResult, TrialResult};
pub use ga::{GAParams, StrategyPool};
