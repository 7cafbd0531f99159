use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ringmem::experiment::config::{ExperimentConfig, ExperimentKind, Overrides};
use ringmem::experiment::execute;

#[derive(Parser)]
#[command(name = "ringmem", version, about = "Phase-modulated XY spin ring simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Magnon overlaps at constant phase.
    Fig1(Common),
    /// Magnon overlaps under the step schedule.
    Fig2(Common),
    /// Revival fidelity for truncated Fourier schedules.
    Fig3(Common),
    /// Probe-state attenuation against field disorder.
    NoiseSweep(Common),
    /// Custom run described by a config file.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    coupling: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    field: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    period: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta0: Option<f64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(kind: ExperimentKind, args: Common) -> anyhow::Result<()> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut config = match &args.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        output: args.out,
        master_seed: args.seed,
        n_sites: args.n_sites,
        coupling: args.coupling,
        field: args.field,
        period: args.period,
        theta0: args.theta0,
    });
    let resolved = config.resolve(kind)?;
    for path in execute(&resolved)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Fig1(a) => (ExperimentKind::Fig1, a),
        Command::Fig2(a) => (ExperimentKind::Fig2, a),
        Command::Fig3(a) => (ExperimentKind::Fig3, a),
        Command::NoiseSweep(a) => (ExperimentKind::NoiseSweep, a),
        Command::Run(a) => (ExperimentKind::Custom, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
