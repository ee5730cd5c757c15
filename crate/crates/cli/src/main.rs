//! `hejhal-lab`: kernel computations and the λ-matrix checks from the command line.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 input error, 3 numerical failure.

mod commands;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hejhal_lab::Error;
use num_complex::Complex64;

use commands::{KernelArg, MethodArg, Outcome, SweepArgs, TabulateArgs};
use run::RunConfig;

const THREADS_VAR: &str = "HEJHAL_LAB_THREADS";

#[derive(Parser)]
#[command(name = "hejhal-lab", version, about = "Kernel functions and λ-matrix checks on multiply connected domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Domain config (JSON).
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the quasi-random samples (default 42, or the config's "seed").
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, NAME=VALUE; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Compute λ by one or all methods and write CSV.
    Lambda {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
    },
    /// Shrink an added circular hole and trace the eigenvalues of λ.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: usize,
        /// Hole center as RE,IM; defaults to the deepest interior sample.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Option<Complex64>,
        /// First radius; each step halves it.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Tabulate a kernel on a G×G interior grid.
    Tabulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kernel: KernelArg,
        #[arg(long)]
        grid: usize,
        /// Fixed second argument as RE,IM.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,0")]
        w: Complex64,
        /// Harmonic measure index for F.
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_VAR} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

type Runner<'a> = Box<dyn Fn(&RunConfig) -> Result<Outcome, Error> + 'a>;

fn execute(command: Command) -> Result<Outcome, Error> {
    configure_threads()?;
    let (common, run): (&Common, Runner) = match &command {
        Command::Verify { common } => (common, Box::new(commands::verify)),
        Command::Lambda { common, method } => (common, Box::new(move |c| commands::lambda(c, *method))),
        Command::Sweep { common, steps, center, radius } => {
            let args = SweepArgs { steps: *steps, center: *center, radius: *radius };
            (common, Box::new(move |c| commands::sweep(c, &args)))
        }
        Command::Tabulate { common, kernel, grid, w, j } => {
            let args = TabulateArgs { kernel: *kernel, grid: *grid, w: *w, j: *j };
            (common, Box::new(move |c| commands::tabulate(c, &args)))
        }
    };
    let config = RunConfig::load(&common.config)?.with_overrides(common.seed, &common.tolerances)?;
    let outcome = run(&config)?;
    write_output(common.out.as_deref(), &outcome.output)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(outcome) if outcome.pass => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
