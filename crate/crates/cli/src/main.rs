//! `edgechaos` experiment harness.

mod commands;
mod error;
mod output;
mod params;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use error::{usage, CliError, CliResult};
use output::{sha256_file, Format, Manifest, Output, MANIFEST};
use params::*;

#[derive(Debug, Parser)]
#[command(name = "edgechaos", version, about = "Hermite activations, edge-of-chaos diagnostics and deep ESN experiments")]
struct Cli {
    /// Directory receiving artifacts and `manifest.json`.
    #[arg(long, global = true, default_value = "out")]
    output_dir: PathBuf,
    /// Overrides the command's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON object of command parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hermite spectrum of an activation, with closed-form discrepancies.
    Spectra(SpectraArgs),
    /// Synthesize an HP activation from a design profile.
    Design(DesignArgs),
    /// Lyapunov measure and recurrence plot of a network or ESN.
    Criticality(CriticalityArgs),
    /// Deep echo state network training, prediction and evolution.
    #[command(subcommand)]
    Esn(EsnCommand),
    /// MLP training and parameter sweeps.
    #[command(subcommand)]
    Mlp(MlpCommand),
    /// Write synthetic datasets.
    #[command(subcommand)]
    Datagen(DatagenCommand),
    /// Re-run a manifest and compare artifact digests.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn read_config(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn job_of(command: Command, file: Option<&Value>, seed: Option<u64>) -> CliResult<Job> {
    Ok(match command {
        Command::Spectra(a) => Job::Spectra(resolve(&a, file, seed)?),
        Command::Design(a) => Job::Design(resolve(&a, file, seed)?),
        Command::Criticality(a) => Job::Criticality(resolve(&a, file, seed)?),
        Command::Esn(EsnCommand::Train(a)) => Job::EsnTrain(resolve(&a, file, seed)?),
        Command::Esn(EsnCommand::Predict(a)) => Job::EsnPredict(resolve(&a, file, seed)?),
        Command::Esn(EsnCommand::Evolve(a)) => Job::EsnEvolve(resolve(&a, file, seed)?),
        Command::Mlp(MlpCommand::Train(a)) => Job::MlpTrain(resolve(&a, file, seed)?),
        Command::Mlp(MlpCommand::Sweep(a)) => Job::MlpSweep(resolve(&a, file, seed)?),
        Command::Datagen(DatagenCommand::MackeyGlass(a)) => Job::DatagenMackeyGlass(resolve(&a, file, seed)?),
        Command::Datagen(DatagenCommand::Blobs(a)) => Job::DatagenBlobs(resolve(&a, file, seed)?),
        Command::Datagen(DatagenCommand::Moons(a)) => Job::DatagenMoons(resolve(&a, file, seed)?),
        Command::Datagen(DatagenCommand::IdxFixture(a)) => Job::DatagenIdxFixture(resolve(&a, file, seed)?),
        Command::Replay { .. } => unreachable!("replay is handled before resolution"),
    })
}

fn execute(job: &Job, dir: &Path, format: Format) -> CliResult<Manifest> {
    let mut out = Output::create(dir, format)?;
    commands::run(job, &mut out)?;
    out.finish(&job_value(job))
}

fn replay(manifest_path: &Path, dir: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", manifest_path.display())))?;
    let recorded: Manifest = serde_json::from_str(&text).map_err(|e| usage(format!("invalid manifest: {e}")))?;
    let job: Job = serde_json::from_value(recorded.job.clone()).map_err(|e| usage(format!("invalid job: {e}")))?;
    for input in &recorded.inputs {
        let now = sha256_file(Path::new(&input.path)).map_err(|_| usage(format!("missing input {}", input.path)))?;
        if now != input.sha256 {
            return Err(CliError::Internal(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let fresh = execute(&job, dir, recorded.format)?;
    let mismatched: Vec<&str> = recorded
        .artifacts
        .iter()
        .filter(|a| !fresh.artifacts.contains(a))
        .map(|a| a.path.as_str())
        .collect();
    if mismatched.is_empty() && fresh.artifacts.len() == recorded.artifacts.len() {
        println!("replay matched {} artifacts", fresh.artifacts.len());
        Ok(())
    } else {
        Err(CliError::Internal(format!("artifacts differ: {}", mismatched.join(", "))))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli.output_dir);
    }
    let file = cli.config.as_deref().map(read_config).transpose()?;
    let job = job_of(cli.command, file.as_ref(), cli.seed)?;
    execute(&job, &cli.output_dir, cli.format)?;
    println!("{}", cli.output_dir.join(MANIFEST).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
