//! `guessga`: run the p-guessing learning experiments from the command line.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use guessga::config::OUT_DIR_ENV;
use guessga::run::{self, Outcome};
use guessga::{CalibrationAxis, Command, Config, Error, LevelPreset, Overrides, PayoffModel};

#[derive(Debug, Parser)]
#[command(
    name = "guessga",
    version,
    about = "Genetic-algorithm learning in unstable p-guessing games"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Flags {
    /// Probability of the low regime (p < 1).
    #[arg(long, global = true, value_parser = probability)]
    q: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true)]
    n_trials: Option<usize>,
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    pool_size: Option<usize>,
    /// Mutation probability.
    #[arg(long, global = true, value_parser = probability)]
    rho: Option<f64>,
    /// Mutation step.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    payoff: Option<PayoffArg>,
    /// Output directory (falls back to $GUESSGA_OUT, then ./results).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trials; output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON config file; a run manifest is also accepted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the materialized config and exit without writing anything.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PayoffArg {
    Quadratic,
    Winner,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Trajectory of the mean strategy at a fixed q.
    Converge,
    /// Mean final strategy over the q-grid.
    SweepQ,
    /// Mutation calibration at q = 0 and q = 1.
    Calibrate {
        #[arg(value_parser = parse_axis)]
        axis: CalibrationAxis,
    },
    /// Cross-trial variance of the final strategy over the q-grid.
    Variance,
    /// q-sweep with the iteration budget of a reasoning level
    /// (k0 = 0, k-low = 10, k-mid = 100, k-high = 1000, k-max = 5000).
    Levelk {
        #[arg(value_parser = parse_level)]
        level: LevelPreset,
    },
    /// q-sweep under the winner-take-all payoff.
    AltPayoff,
    /// Re-run the experiment recorded in a manifest.
    Rerun { manifest: PathBuf },
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn parse_axis(s: &str) -> Result<CalibrationAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_level(s: &str) -> Result<LevelPreset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter { .. }
        | Error::Validation(_)
        | Error::Manifest { .. }
        | Error::NoNashReference(_) => 2,
        _ => 1,
    }
}

fn report(manifest: &std::path::Path, outcome: &Outcome) {
    println!("{}", outcome.summary);
    for (name, _) in &outcome.files {
        println!("wrote {}", manifest.with_file_name(name).display());
    }
    println!("wrote {}", manifest.display());
}

fn run(cli: Cli) -> Result<(), Error> {
    let f = &cli.flags;
    if let Cmd::Rerun { manifest } = &cli.command {
        if f.dry_run {
            let m = guessga::report::RunManifest::load(manifest)?;
            print!("{}", m.to_canonical_json()?);
            return Ok(());
        }
        let (path, outcome) = run::rerun(manifest, f.out.as_deref())?;
        report(&path, &outcome);
        return Ok(());
    }

    let overrides = Overrides {
        q: f.q,
        iterations: f.iterations,
        n_trials: f.n_trials,
        seed: f.seed,
        pool_size: f.pool_size,
        rho: f.rho,
        epsilon: f.epsilon,
        payoff: f.payoff.map(|p| match p {
            PayoffArg::Quadratic => PayoffModel::QuadraticLoss,
            PayoffArg::Winner => PayoffModel::WinnerTakeAll,
        }),
        out_dir: f.out.clone(),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let mut config = Config::resolve(f.config.as_deref(), env_out, &overrides)?;

    let command = match cli.command {
        Cmd::Converge => Command::Converge,
        Cmd::SweepQ => Command::SweepQ,
        Cmd::Calibrate { axis } => Command::Calibrate { axis },
        Cmd::Variance => Command::Variance,
        Cmd::Levelk { level } => Command::Levelk { level },
        Cmd::AltPayoff => Command::AltPayoff,
        Cmd::Rerun { .. } => unreachable!(),
    };
    command.materialize(&mut config);

    if f.dry_run {
        let value = serde_json::json!({ "experiment": command, "config": config });
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        return Ok(());
    }

    let out_dir = config.out_dir.clone();
    let (path, outcome) = run::run_to_dir(&command, &config, &out_dir)?;
    report(&path, &outcome);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.flags.jobs;
    if jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let result = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => {
                eprintln!("error: cannot start worker pool: {e}");
                return ExitCode::from(1);
            }
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
