use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use falconer_cli::{emit_report, run_experiment, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "falconer",
    version,
    about = "Desk-scale experiments on distance sets of Cartesian products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the factor measures and write their atoms.
    Cantor(RunArgs),
    /// Audit AD-regularity and fit Frostman exponents.
    Regularity(RunArgs),
    /// Additive energy profiles and the smoothed-energy Parseval check.
    Energy(RunArgs),
    /// Weighted spherical averages and the angular decomposition.
    Spherical(RunArgs),
    /// Solid averages of each factor.
    Solid(RunArgs),
    /// Stationary-phase expansion of the weighted circle integral.
    Stationary(RunArgs),
    /// Truncated Mattila integral.
    Mattila(RunArgs),
    /// Distance measures, coverage and Riesz energies.
    Distance(RunArgs),
    /// Dimension thresholds and margins.
    Thresholds(RunArgs),
    /// Every experiment above, then a summary.
    FullReport(RunArgs),
    /// Summarize the manifests in a directory.
    Report { dir: PathBuf },
    /// Print the default configuration for an experiment kind.
    Config {
        #[arg(value_parser = parse_kind)]
        kind: ExperimentKind,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long = "dz-k")]
    dz_k: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::ALL
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown experiment kind `{s}`"))
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::new(kind),
    };
    config.kind = kind;
    if let Some(s) = args.seed {
        config.seed = Some(s);
    }
    if let Some(g) = args.gamma0 {
        config.gamma0 = g;
    }
    if let Some(k) = args.dz_k {
        config.dz_k = k;
    }
    if let Some(p) = args.parallelism {
        config.parallelism = p;
    }
    if let Some(o) = &args.out {
        config.output = Some(o.clone());
    }
    Ok(config)
}

fn execute(command: Command) -> Result<(), CliError> {
    let (kind, args) = match command {
        Command::Report { dir } => {
            print!("{}", emit_report(&dir)?);
            return Ok(());
        }
        Command::Config { kind } => {
            print!("{}", ExperimentConfig::new(kind).to_toml());
            return Ok(());
        }
        Command::Cantor(a) => (ExperimentKind::Cantor, a),
        Command::Regularity(a) => (ExperimentKind::Regularity, a),
        Command::Energy(a) => (ExperimentKind::Energy, a),
        Command::Spherical(a) => (ExperimentKind::Spherical, a),
        Command::Solid(a) => (ExperimentKind::Solid, a),
        Command::Stationary(a) => (ExperimentKind::Stationary, a),
        Command::Mattila(a) => (ExperimentKind::Mattila, a),
        Command::Distance(a) => (ExperimentKind::Distance, a),
        Command::Thresholds(a) => (ExperimentKind::Thresholds, a),
        Command::FullReport(a) => (ExperimentKind::FullReport, a),
    };
    let config = load_config(kind, &args)?;
    let out = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let outcome = run_experiment(&config, &out)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
