//! Command-line front end: argument parsing, worker-thread setup, and the
//! exit-code contract (0 success, 2 usage or bad inputs, 3 construction
//! failure, 4 verification failure).

mod commands;
mod config;
mod io;
mod manifest;
mod svg;

pub use commands::{
    cmd_construct, cmd_export_svg, cmd_montecarlo, cmd_params, cmd_sweep, cmd_verify, CliError,
    VerificationFile,
};
pub use config::parse_config;
pub use io::{
    atomic_write, cubes_csv, cubes_file, fmt_real, load_run, parse_cubes_csv, points_csv,
    points_file, read_manifest,
};
pub use manifest::{manifest_for, schedule_params, GenerationSummary, MeasuredConstants, RunManifest};
pub use svg::render_svg;

use crate::Real;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable capping the worker thread count.
pub const THREADS_VAR: &str = "TUBECANTOR_THREADS";

#[derive(Parser)]
#[command(
    name = "tubecantor",
    version,
    about = "Builds and audits Cantor-type cube families with small tube intersections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived run parameters for a dimension and exponent.
    Params {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: Real,
        #[arg(long, default_value_t = 1.0)]
        c_abs: Real,
    },
    /// Build the cube families described by a config file.
    Construct {
        #[arg(long)]
        config: PathBuf,
        /// Run directory to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a run directory and write verification.json.
    Verify {
        #[arg(long)]
        run: PathBuf,
    },
    /// Profile tube content across widths; writes sweep.csv.
    Sweep {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 1000)]
        tubes: u64,
        /// Smallest tube width (default: deepest cube side).
        #[arg(long)]
        min_width: Option<Real>,
        /// Largest tube width (default: 1).
        #[arg(long)]
        max_width: Option<Real>,
    },
    /// Estimate the sampling-event frequencies by repeated trials.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one generation to SVG (d = 2 runs only).
    ExportSvg {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        generation: u32,
        /// Output file (default: generation_<n>.svg in the run directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn thread_override() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_VAR) {
        Ok(value) => match value.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_VAR} must be a positive integer (got {value:?})"
            )),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{THREADS_VAR}: {e}")),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match thread_override() {
        Ok(Some(threads)) => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
        Ok(None) => {}
        Err(message) => {
            eprintln!("error: {message}");
            return 2;
        }
    }
    let result = match cli.command {
        Command::Params { d, s, c_abs } => cmd_params(d, s, c_abs),
        Command::Construct { config, out } => cmd_construct(&config, &out),
        Command::Verify { run } => cmd_verify(&run),
        Command::Sweep {
            run,
            tubes,
            min_width,
            max_width,
        } => cmd_sweep(&run, tubes, min_width, max_width),
        Command::Montecarlo {
            config,
            trials,
            out,
        } => cmd_montecarlo(&config, trials, &out),
        Command::ExportSvg {
            run,
            generation,
            out,
        } => cmd_export_svg(&run, generation, out.as_deref()),
    };
    match result {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}
