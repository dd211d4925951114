use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use symrtn::experiment::{exit_code, run, ExperimentConfig, ExperimentKind};
use symrtn::Error;

#[derive(Parser)]
#[command(
    name = "symrtn",
    version,
    about = "Random symmetric PEPS entanglement via the replica spin model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Haar averages of replica traces against exact partition functions.
    Exactness(RunArgs),
    /// Solution counts of the group constraints against the wall formula.
    Oracle(RunArgs),
    /// Ground-state entropies across regions and the area-law fit.
    Arealaw(RunArgs),
    /// Concentration of the second Renyi entropy as the bond dimension grows.
    Fluctuation(RunArgs),
    /// Renyi-n entropies from sampling, enumeration and the ground state.
    Renyi(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and JSON results.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Allow budgets above their defaults.
    #[arg(long)]
    budget_override: bool,
}

impl Command {
    fn split(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::Exactness(a) => (ExperimentKind::Exactness, a),
            Command::Oracle(a) => (ExperimentKind::Oracle, a),
            Command::Arealaw(a) => (ExperimentKind::Arealaw, a),
            Command::Fluctuation(a) => (ExperimentKind::Fluctuation, a),
            Command::Renyi(a) => (ExperimentKind::Renyi, a),
        }
    }
}

fn prepare(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        return Err(Error::Config(format!(
            "config kind is {:?} but subcommand is {}",
            config.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate(args.budget_override)?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            error!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = prepare(kind, args).and_then(|config| {
        info!("running {} (params {})", kind.name(), config.params_hash());
        run(&config)
    });
    match &outcome {
        Ok(report) => {
            for c in &report.criteria {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            match report.write(&args.out) {
                Ok(paths) => {
                    for p in paths {
                        info!("wrote {}", p.display());
                    }
                }
                Err(e) => {
                    error!("{e}");
                    return ExitCode::from(2);
                }
            }
            info!("finished in {:.2}s", report.runtime_seconds);
        }
        Err(e) => error!("{e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
