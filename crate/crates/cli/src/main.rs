use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use votetrade_core::{Mode, SimMode};

mod commands;

/// Equilibria, welfare and simulations of two-issue vote trading.
#[derive(Parser, Debug)]
#[command(name = "votetrade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for a non-trivial equilibrium and write it as JSON.
    Solve(SolveArgs),
    /// Welfare report for an equilibrium, with optional region masks.
    Welfare(WelfareArgs),
    /// Monte Carlo committees at an equilibrium.
    Simulate(SimulateArgs),
    /// Build a KDE distribution spec from a survey CSV.
    Ingest(IngestArgs),
    /// Write a density or region lattice as CSV.
    ExportGrid(ExportGridArgs),
}

#[derive(Args, Debug)]
struct GameArgs {
    /// Distribution spec (JSON).
    #[arg(long)]
    dist: PathBuf,
    /// Committee size, odd [default: 11].
    #[arg(long)]
    n: Option<usize>,
    /// myopic or groupwide [default: myopic].
    #[arg(long)]
    mode: Option<Mode>,
    /// Solver residual tolerance in radians.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Solver iteration cap per start.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Random-start seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Number of solver starts; the first is the naive profile.
    #[arg(long, default_value_t = 1)]
    starts: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct WelfareArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Solution JSON from `solve`; solved inline when absent.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write region and welfare masks at this resolution.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long)]
    solution: Option<PathBuf>,
    /// single-trade or all-pairs [default: follows --mode].
    #[arg(long)]
    sim_mode: Option<SimMode>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write the first committees in full as JSON.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    dump_count: u64,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Survey CSV with two integer response columns.
    #[arg(long)]
    csv: PathBuf,
    /// Response scale as LO,HI.
    #[arg(long, default_value = "1,7", value_parser = parse_scale)]
    scale: [i64; 2],
    /// Kernel bandwidth, a number or "auto".
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Mass tolerance for validation.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Distribution spec to write.
    #[arg(long)]
    out: PathBuf,
    /// Validation report [default: next to --out].
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write a density heatmap at this resolution.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GridKind {
    Density,
    Regions,
    Welfare,
}

#[derive(Args, Debug)]
struct ExportGridArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_enum, default_value_t = GridKind::Density)]
    kind: GridKind,
    /// Cells per axis.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_scale(s: &str) -> Result<[i64; 2], String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([parse(lo)?, parse(hi)?])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Welfare(a) => commands::welfare(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::ExportGrid(a) => commands::export_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
