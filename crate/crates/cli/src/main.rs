use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hybridmech_cli::{load_config, run_experiment, CliError, CliResult, Kind};

/// Driven emitter coupled to a mechanical oscillator: run an experiment from
/// a JSON config (or a previous run's manifest) and write CSV data.
#[derive(Debug, Parser)]
#[command(name = "hybridmech", version)]
struct Args {
    /// Config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory count; overrides `run.trajectories`.
    #[arg(long)]
    trajectories: Option<usize>,
    /// semiclassical, ensemble, phase-diagram, spectra or validate.
    #[arg(long)]
    kind: Option<String>,
    /// Integrate the emitter's Bloch equations instead of using its
    /// instantaneous steady state.
    #[arg(long)]
    full_bloch: bool,
}

fn run(args: Args) -> CliResult<()> {
    let mut raw = load_config(&args.config)?.raw;
    if let Some(k) = &args.kind {
        raw.kind = Kind::parse(k).ok_or_else(|| {
            CliError::config("--kind", format!("unknown kind `{k}` (semiclassical, ensemble, phase-diagram, spectra, validate)"))
        })?;
    }
    if let Some(s) = args.seed {
        raw.run.seed = s;
    }
    if let Some(n) = args.trajectories {
        raw.run.trajectories = n;
    }
    if args.full_bloch {
        raw.run.full_bloch = true;
    }
    if let Some(o) = args.out {
        raw.output.dir = Some(o);
    }
    let out = raw
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let cfg = raw.resolve()?;
    let report = run_experiment(&cfg, &out)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let err = CliError::Config {
                field: None,
                message: e.to_string(),
            };
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
