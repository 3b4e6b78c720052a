use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pps_relax::scenario::{
    report_file, run_pipeline, run_simulate, run_sweep, RunOptions, RunOutput, Scenario,
    ScenarioError,
};

/// Relaxation of pseudo-pure states in a two-spin system.
#[derive(Parser)]
#[command(name = "pps-relax", version)]
struct Cli {
    /// Suppress warnings and the list of written files.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact trajectories of every configured state (trajectory.csv).
    Simulate(RunArgs),
    /// 00 minus 11 differences across a parameter sweep (sweep.csv).
    Sweep(RunArgs),
    /// Synthesize, add noise, fit and read out coefficients (pipeline.csv).
    Pipeline(RunArgs),
    /// Summarize CSV files written by the other commands.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file; the built-in default scenario when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Overrides the noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> Result<(Scenario, RunOptions, Vec<String>), ScenarioError> {
    let (scenario, warnings) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
                path: path.clone(),
                source,
            })?;
            Scenario::from_json_str(&text)?
        }
        None => (Scenario::default(), Vec::new()),
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions {
        out_dir,
        plot: args.plot,
        seed: args.seed,
    };
    Ok((scenario, opts, warnings))
}

fn run(cli: &Cli) -> Result<(), ScenarioError> {
    let runner = match &cli.command {
        Command::Simulate(args) => (args, run_simulate as fn(&_, &_) -> _),
        Command::Sweep(args) => (args, run_sweep as fn(&_, &_) -> _),
        Command::Pipeline(args) => (args, run_pipeline as fn(&_, &_) -> _),
        Command::Report { files } => {
            let mut text = String::new();
            for path in files {
                text.push_str(&report_file(path)?);
            }
            print!("{text}");
            return Ok(());
        }
    };
    let (args, f) = runner;
    let (scenario, opts, mut warnings) = load(args)?;
    let RunOutput {
        files,
        warnings: run_warnings,
    } = f(&scenario, &opts)?;
    warnings.extend(run_warnings);
    if !cli.quiet {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        for path in &files {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
