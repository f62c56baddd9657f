use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "centroflow",
    about = "p-weighted centro-affine flow runner and L-2 Minkowski problem toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML or JSON); repeat to run a batch.
    #[arg(long = "config", required = true, num_args = 1)]
    config: Vec<PathBuf>,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for random-input generation.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Optional config (only seed and output.dir are used).
    #[arg(long = "config")]
    config: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the (optionally normalized) flow from a configured initial curve.
    Evolve(RunArgs),
    /// Solve s(s_θθ+s)^{1/3} = Φ for the configured target.
    Solve(RunArgs),
    /// Compute Φ = s·(s_θθ+s)^{1/3} for a configured curve.
    Forward(RunArgs),
    /// Solvability diagnostics for the configured target.
    Diagnose(RunArgs),
    /// Run the invariant suite (exit 1 on any failure).
    Selftest(SelftestArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Evolve(a) => centroflow::cli::run_batch("evolve", &a.config, a.out.as_deref(), a.seed),
        Command::Solve(a) => centroflow::cli::run_batch("solve", &a.config, a.out.as_deref(), a.seed),
        Command::Forward(a) => {
            centroflow::cli::run_batch("forward", &a.config, a.out.as_deref(), a.seed)
        }
        Command::Diagnose(a) => {
            centroflow::cli::run_batch("diagnose", &a.config, a.out.as_deref(), a.seed)
        }
        Command::Selftest(a) => {
            centroflow::cli::run_batch("selftest", &a.config, a.out.as_deref(), a.seed)
        }
    };
    std::process::exit(code);
}
