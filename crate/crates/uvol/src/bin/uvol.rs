use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use uvol::cli::{run, Command};

/// Robust option pricing and hedging under volatility and drift bands.
#[derive(Parser)]
#[command(name = "uvol", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Upper/lower price of a state-dependent payoff plus the surface CSV.
    Price(Common),
    /// Price of a discrete-path-dependent payoff over a monitoring schedule.
    PricePathDep(Common),
    /// Delta-hedge simulated paths at a worst-case surface; one ledger CSV
    /// per path.
    Hedge(Common),
    /// Ask-bid spread with its gamma-exposure bound.
    Spread(Common),
    /// Put-call parity residual.
    Parity(Common),
    /// Simulate paths under volatility/drift policies.
    Simulate(Common),
    /// Log-return mean band and worst-case confidence interval.
    BandStats(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Price(c) => (Command::Price, c),
        Cmd::PricePathDep(c) => (Command::PricePathDep, c),
        Cmd::Hedge(c) => (Command::Hedge, c),
        Cmd::Spread(c) => (Command::Spread, c),
        Cmd::Parity(c) => (Command::Parity, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::BandStats(c) => (Command::BandStats, c),
    };
    ExitCode::from(run(command, &common.config, &common.out, common.seed) as u8)
}
