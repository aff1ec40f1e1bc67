//! `mmd` - biodistance analysis for binary non-metric traits.
//!
//! Subcommands compose through files: counts CSVs flow into distance-matrix
//! CSVs, which flow into diagnostics and clustering. Every stochastic
//! subcommand takes `--seed` and is reproducible bit for bit regardless of
//! the worker count (capped by the `MMD_THREADS` environment variable,
//! 0 or unset for automatic).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "mmd",
    version,
    about = "Biodistance analysis for binary non-metric traits"
)]
struct Cli {
    /// Print a JSON run manifest to standard error.
    #[arg(long, global = true)]
    manifest: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MatrixKindArg {
    /// Standardized distances (clamped at zero).
    St,
    /// Raw distances (negative values preserved).
    Raw,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate an individual-level CSV into the count-level format.
    Ingest {
        /// Individual-level CSV: population,individual,<trait...> with 0/1/? cells.
        #[arg(long)]
        individuals: PathBuf,
        /// Output counts CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the transformed frequencies and their sigmas as CSV.
    Transform {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise distance matrix from a counts file.
    Distances {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixKindArg::St)]
        kind: MatrixKindArg,
        /// Decimals in the output matrix.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=12))]
        precision: u8,
    },
    /// Chi-square significance test for one population pair.
    Chi2 {
        #[arg(long)]
        counts: PathBuf,
        /// Two population labels separated by a comma.
        #[arg(long)]
        pair: String,
    },
    /// Parametric bootstrap of the trait sigmas; writes the bootstrapped matrix.
    Bootstrap {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, default_value_t = 500)]
        iterations: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the raw (unstandardized) bootstrapped matrix instead.
        #[arg(long)]
        raw: bool,
        /// Directory receiving one replicate CSV per (population, trait) cell.
        #[arg(long)]
        keep_replicates: Option<PathBuf>,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(0..=12))]
        precision: u8,
    },
    /// Representativeness report from counts plus plain and bootstrapped matrices.
    Diagnose {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        matrix_plain: PathBuf,
        #[arg(long)]
        matrix_boot: PathBuf,
        /// Relative-error threshold (percent) for the verdict.
        #[arg(long, default_value_t = 10.0)]
        e_threshold: f64,
        /// Information-fraction threshold for per-population warnings.
        #[arg(long, default_value_t = 0.5)]
        t_threshold: f64,
    },
    /// UPGMA dendrogram of a distance matrix: Newick file plus a text tree.
    Cluster {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an artificial dataset with size and measurement thresholds.
    Simulate {
        #[arg(long, default_value_t = 10)]
        populations: usize,
        #[arg(long, default_value_t = 13)]
        traits: usize,
        #[arg(long, default_value_t = 100)]
        max_size: u32,
        /// Minimum population size.
        #[arg(long, default_value_t = 50)]
        lambda1: u32,
        /// Minimum per-trait measured count (clamped to the population size).
        #[arg(long, default_value_t = 45)]
        lambda2: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate-bootstrap-compare studies over replicate seeds.
    Study {
        #[arg(long, default_value_t = 10)]
        populations: usize,
        #[arg(long, default_value_t = 13)]
        traits: usize,
        #[arg(long, default_value_t = 100)]
        max_size: u32,
        #[arg(long, default_value_t = 50)]
        lambda1: u32,
        #[arg(long, default_value_t = 45)]
        lambda2: u32,
        #[arg(long, default_value_t = 500)]
        iterations: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of replicate runs; replicate j uses seed + j.
        #[arg(long, default_value_t = 1)]
        replicates: u32,
    },
    /// Sweep the bootstrapped sigma over sample sizes and fit the power law.
    ScalingStudy {
        #[arg(long, default_value_t = 10)]
        n_min: u32,
        #[arg(long, default_value_t = 1000)]
        n_max: u32,
        #[arg(long, default_value_t = 20)]
        steps: u32,
        #[arg(long, default_value_t = 500)]
        iterations: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output table: n, analytic sigma, bootstrapped sigma, fitted value.
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_thread_pool() {
    let threads = match std::env::var("MMD_THREADS") {
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("warning: ignoring unparseable MMD_THREADS value '{raw}'");
                0
            }
        },
        Err(_) => 0,
    };
    if threads > 0 {
        // ignore failure if a pool already exists (e.g. under test harnesses)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match commands::run(cli.command, cli.manifest) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
