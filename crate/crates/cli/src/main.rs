//! `netsurv` command-line tool.
//!
//! Exit codes: 0 on success, 1 for invalid arguments or parameters, 2 for
//! input-data and life-table coverage problems.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "netsurv",
    version,
    about = "Survival estimands under a four-component mortality decomposition"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Directory that receives all output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Format of summary outputs. Curves and cohorts are always CSV.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; values above 1 enable parallel simulation and estimation.
    #[arg(long, global = true, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallel: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form estimand curves and gap summaries for scenario grids.
    Curves(commands::CurvesArgs),
    /// Simulate a cohort from a component model.
    Simulate(commands::SimulateArgs),
    /// Kaplan-Meier, Pohar Perme and SMR estimates for a cohort.
    Estimate(commands::EstimateArgs),
    /// Decompose a one- or two-arm trial into Components B, C and D.
    Decompose(commands::DecomposeArgs),
    /// Recommend the estimand an analysis actually targets.
    Advise(commands::AdviseArgs),
    /// Check that a life table covers a cohort's follow-up.
    LifetableCheck(commands::LifetableCheckArgs),
}

fn run(cli: Cli) -> netsurv::Result<()> {
    let g = &cli.global;
    std::fs::create_dir_all(&g.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.parallel as usize)
        .build()
        .map_err(|e| netsurv::Error::Validation(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Curves(a) => commands::curves(g, a),
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Estimate(a) => commands::estimate(g, a),
        Command::Decompose(a) => commands::decompose(g, a),
        Command::Advise(a) => commands::advise(g, a),
        Command::LifetableCheck(a) => commands::lifetable_check(g, a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
