//! `railyard`: sampling, partition functions and limit shapes of rail-yard dimer models.

mod commands;
mod error;
mod grid;
mod manifest;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::Run;
use error::{CliError, Result};
use manifest::{file_digest, inputs_digest, OutputFile, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "railyard", version, about)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Where to write the run manifest (default: next to the first output file).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw coverings with doubly free boundary conditions.
    Sample(commands::SampleArgs),
    /// Exact, truncated or brute-force partition functions.
    PartitionFunction(commands::PartitionFunctionArgs),
    /// Limit density of the height function on a (χ, κ) grid.
    Density(commands::DensityArgs),
    /// Trace the frozen boundary.
    FrozenBoundary(commands::FrozenBoundaryArgs),
    /// Compare the contour-integral and density-integral Laplace transforms.
    LaplaceCheck(commands::LaplaceCheckArgs),
    /// Empirical rescaled height of samples against the limit shape.
    Compare(commands::CompareArgs),
    /// Rerun the command recorded in a manifest and check its outputs are unchanged.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct ReplayArgs {
    manifest_file: PathBuf,
}

fn dispatch(command: &Command) -> Result<Run> {
    match command {
        Command::Sample(a) => commands::sample(a),
        Command::PartitionFunction(a) => commands::partition_function(a),
        Command::Density(a) => commands::density(a),
        Command::FrozenBoundary(a) => commands::frozen_boundary_cmd(a),
        Command::LaplaceCheck(a) => commands::laplace_check_cmd(a),
        Command::Compare(a) => commands::compare(a),
        Command::Replay(a) => replay(&a.manifest_file),
    }
}

fn manifest_for(args: &[String], run: &Run, secs: f64) -> Result<RunManifest> {
    let outputs = run
        .outputs
        .iter()
        .map(|p| Ok(OutputFile { path: p.clone(), sha256: file_digest(p)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunManifest {
        command_line: args.to_vec(),
        config_digest: inputs_digest(&run.inputs)?,
        seed: run.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_secs: secs,
        outputs,
    })
}

fn default_manifest_path(run: &Run) -> Option<PathBuf> {
    run.outputs.first().map(|p| {
        let mut s = p.clone().into_os_string();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

fn replay(path: &Path) -> Result<Run> {
    let recorded = RunManifest::read(path)?;
    let cli = Cli::try_parse_from(std::iter::once("railyard".to_string()).chain(recorded.command_line.iter().cloned()))
        .map_err(|e| CliError::config(format!("recorded command line does not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::config("a manifest cannot record a replay"));
    }
    let run = dispatch(&cli.command)?;
    if inputs_digest(&run.inputs)? != recorded.config_digest {
        return Err(CliError::Replay("input files changed since the recorded run".into()));
    }
    let changed = recorded.changed_outputs()?;
    if !changed.is_empty() {
        let list: Vec<String> = changed.iter().map(|p| p.display().to_string()).collect();
        return Err(CliError::Replay(format!("outputs differ: {}", list.join(", "))));
    }
    eprintln!("replay: {} outputs reproduced", recorded.outputs.len());
    Ok(Run::default())
}

fn run(cli: &Cli, args: &[String]) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    let start = Instant::now();
    let run = dispatch(&cli.command)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Ok(());
    }
    if let Some(path) = cli.manifest.clone().or_else(|| default_manifest_path(&run)) {
        manifest_for(args, &run, start.elapsed().as_secs_f64())?.write(&path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
