use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Exact restriction-map reconstruction from enhanced double digest data.
///
/// Exit codes: 0 success, 1 no solution or invalid input, 2 usage or format
/// error, 3 a cap was exceeded.
#[derive(Debug, Parser)]
#[command(name = "edd", version)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing on success; rely on the exit code.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the arithmetic consistency of an instance.
    Check { file: PathBuf },
    /// Find the fragment orders consistent with an instance.
    Solve(SolveArgs),
    /// Check one candidate order, given as 1-based fragment indices.
    Verify {
        file: PathBuf,
        /// A fragment order, e.g. `1,3,2` or "1 3 2".
        #[arg(long)]
        pa: String,
        /// B fragment order.
        #[arg(long)]
        pb: String,
    },
    /// Brute-force all orders (small instances only).
    Oracle {
        file: PathBuf,
        /// Largest p + q attempted.
        #[arg(long, default_value_t = 12)]
        limit: usize,
    },
    /// Generate an instance from cut positions or at random.
    Gen(GenArgs),
    /// Encode a graph's Hamiltonian path problem as an instance.
    ReduceHp {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read a Hamiltonian path off a solution of a reduced instance.
    ExtractHp {
        graph: PathBuf,
        /// Text containing `PA:` and `PB:` lines, e.g. saved `solve` output.
        solution: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    /// Print every distinct map, not just the first.
    #[arg(long)]
    all: bool,
    /// Stop expanding after this many maps.
    #[arg(long, default_value_t = 10_000)]
    max_solutions: usize,
    /// Refuse instances with more duplicate labelings than this.
    #[arg(long, default_value_t = 10_080)]
    max_assignments: u128,
    /// Print the compact family notation.
    #[arg(long)]
    emit_families: bool,
    /// Print the edges of the graph that was solved (or first rejected).
    #[arg(long)]
    dump_graph: bool,
    /// Try every bijection between equal-length copies.
    #[arg(long)]
    exhaustive_labeling: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Molecule length.
    #[arg(long)]
    length: u64,
    /// A cut positions; with --cuts-b, replaces random generation.
    #[arg(long, requires = "cuts_b")]
    cuts_a: Option<String>,
    #[arg(long, requires = "cuts_a")]
    cuts_b: Option<String>,
    /// Seed for the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of A fragments.
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// Number of B fragments.
    #[arg(long, default_value_t = 3)]
    q: usize,
    /// Resample until at least this many piece lengths repeat.
    #[arg(long)]
    min_duplicates: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    max_attempts: usize,
    /// Write the cut positions as `GT-` lines to this file.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file } => commands::check(&file),
        Command::Solve(a) => commands::solve(&a),
        Command::Verify { file, pa, pb } => commands::verify(&file, &pa, &pb),
        Command::Oracle { file, limit } => commands::oracle(&file, limit),
        Command::Gen(a) => commands::gen(&a),
        Command::ReduceHp { graph, output } => commands::reduce_hp(&graph, output.as_deref()),
        Command::ExtractHp { graph, solution } => commands::extract_hp(&graph, &solution),
    };
    match result {
        Ok(out) => {
            if !cli.quiet {
                if cli.json {
                    println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
                } else {
                    print!("{}", out.text);
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
