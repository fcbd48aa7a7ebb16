use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coherence::commands::SimParams;
use coherence::experiment::{
    execute, preset_names, Command, Experiment, ExperimentConfig, DEFAULT_GRID, DEFAULT_L_MAX,
};
use coherence::format::load_model;

/// Coherence of consensus and vehicular-formation feedback on toric lattices.
#[derive(Debug, Parser)]
#[command(name = "coherence", version)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file (TOML).
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct Sizes {
    /// Lattice sides, comma separated or repeated.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    l: Vec<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// H2-norm density on a tensor grid of frequencies.
    Density {
        #[command(flatten)]
        model: ModelArg,
        /// Points per axis over [-pi, pi].
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Exact per-site variance, integral bounds and optional dense oracle.
    Variance {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sizes: Sizes,
        /// Also solve the full dense Lyapunov equation where it fits.
        #[arg(long)]
        oracle: bool,
    },
    /// Admissibility verdict: necessary conditions, grid sweep, critical L.
    Admissible {
        #[command(flatten)]
        model: ModelArg,
        /// Grid points per axis.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Largest lattice side searched for an instability.
        #[arg(long, default_value_t = DEFAULT_L_MAX)]
        l_max: usize,
    },
    /// Singularity order, predicted law and fitted exponent.
    Scaling {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sizes: Sizes,
    },
    /// Euler-Maruyama Monte Carlo on a ring or open string.
    Simulate {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long, default_value = "ring", value_parser = ["ring", "string"])]
        topology: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        warmup: Option<f64>,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        noise_intensity: Option<f64>,
        /// Export every k-th post-warmup sample of the first trajectory.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Control effort of dynamic consensus and its lower bounds.
    Effort {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        sizes: Sizes,
    },
    /// Runs a config file or a named preset.
    Run {
        /// Experiment config (TOML).
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// One of the shipped presets.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Lists the shipped presets.
    Presets,
}

fn single(command: Command, model_path: &Path) -> coherence::Result<Experiment> {
    let model = load_model(model_path)?;
    let id = model_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    Ok(Experiment::new(command.name(), command, id, model))
}

fn build(sub: Sub) -> coherence::Result<Vec<Experiment>> {
    let exp = match sub {
        Sub::Density { model, grid } => {
            let mut e = single(Command::Density, &model.model)?;
            e.grid = grid;
            e
        }
        Sub::Variance { model, sizes, oracle } => {
            let mut e = single(Command::Variance, &model.model)?;
            e.sizes = sizes.l;
            e.oracle = oracle;
            e
        }
        Sub::Admissible { model, grid, l_max } => {
            let mut e = single(Command::Admissible, &model.model)?;
            e.grid = grid;
            e.l_max = l_max;
            e
        }
        Sub::Scaling { model, sizes } => {
            let mut e = single(Command::Scaling, &model.model)?;
            e.sizes = sizes.l;
            e
        }
        Sub::Effort { model, sizes } => {
            let mut e = single(Command::Effort, &model.model)?;
            e.sizes = sizes.l;
            e
        }
        Sub::Simulate {
            model,
            sizes,
            topology,
            seed,
            dt,
            t_end,
            warmup,
            trajectories,
            noise_intensity,
            stride,
        } => {
            let mut e = single(Command::Simulate, &model.model)?;
            e.sizes = sizes.l;
            e.seed = seed;
            e.sim = SimParams {
                topology: Some(topology),
                dt,
                t_end,
                warmup,
                noise_intensity,
                trajectories,
                delta_x: None,
                record_stride: stride,
            };
            e
        }
        Sub::Run { config, preset } => {
            let cfg = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(name)) => ExperimentConfig::preset(&name)?,
                (None, None) => unreachable!("clap requires one of --config and --preset"),
            };
            return Ok(cfg.experiments);
        }
        Sub::Presets => unreachable!("handled before building experiments"),
    };
    exp.validate()?;
    Ok(vec![exp])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    if let Sub::Presets = cli.command {
        for name in preset_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let experiments = match build(cli.command) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = false;
    for exp in &experiments {
        match execute(exp, &cli.out) {
            Ok(outcome) => {
                for f in &outcome.files {
                    println!("{}", f.display());
                }
                if let Some(why) = outcome.failure {
                    eprintln!("{why}");
                    failed = true;
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", exp.id);
                failed = true;
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
