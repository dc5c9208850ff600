//! Experiment driver: phase diagrams, gap scans, the lemma-verification
//! suite, mixing and coupling studies.
//!
//! Exit codes: 0 success, 2 check failure, 3 resource cap exceeded.

use clap::{Parser, Subcommand};

mod commands;
mod out;

#[derive(Parser)]
#[command(name = "begmc", version, about = "Mean-field BEG model: exact mixing analysis")]
struct Cli {
    /// JSON config file; explicit command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output directory for CSV/JSON artifacts (stdout summaries always).
    #[arg(long, global = true)]
    out_dir: Option<std::path::PathBuf>,

    /// Worker threads for grid scans (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// State-space cap for exact product-space kernels.
    #[arg(long, global = true, default_value_t = 500_000)]
    cap_states: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-diagram table over a (beta, K) grid with the critical curves.
    Phase(commands::phase::PhaseArgs),
    /// Exact spectral gaps of the lumped chains versus system size.
    GapScan(commands::gap_scan::GapScanArgs),
    /// Run every registered lemma check; nonzero exit if any fails.
    Verify(commands::verify::VerifyArgs),
    /// Seeded Metropolis vs swapping trajectory study.
    Mix(commands::mix::MixArgs),
    /// Coupling times of the transposition coloring chain.
    Couple(commands::couple::CoupleArgs),
    /// Critical points of the free energy at one phase point.
    Landscape(commands::landscape::LandscapeArgs),
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .expect("rayon pool");
    }
    let ctx = commands::Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        cap_states: cli.cap_states,
        config: cli.config.clone(),
    };
    let code = match cli.command {
        Command::Phase(args) => commands::phase::run(&ctx, args),
        Command::GapScan(args) => commands::gap_scan::run(&ctx, args),
        Command::Verify(args) => commands::verify::run(&ctx, args),
        Command::Mix(args) => commands::mix::run(&ctx, args),
        Command::Couple(args) => commands::couple::run(&ctx, args),
        Command::Landscape(args) => commands::landscape::run(&ctx, args),
    };
    std::process::exit(match code {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    });
}
