use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mmwave_secure::harness::{
    emit_results, run_qos_sweep, run_snr_sweep, write_csv, write_json, ExperimentConfig, ExperimentKind, HarnessError,
    OutputFormat,
};

#[derive(Parser)]
#[command(name = "mmwave-secure", version, about = "Secure hybrid beamforming Monte-Carlo sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Secrecy rate versus SNR for every selected algorithm.
    SnrSweep(RunArgs),
    /// Bob/Eve rates versus QoS target for the artificial-noise design.
    QosSweep(RunArgs),
    /// Check a configuration without running it.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
        /// Experiment the configuration is meant for.
        #[arg(long, value_enum, default_value_t = Kind::SnrSweep)]
        kind: Kind,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML file with experiment keys; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// `key=value` (value in TOML syntax); applied after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads, 0 = one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    SnrSweep,
    QosSweep,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(trials) = self.trials {
            overrides.push(format!("num_trials={trials}"));
        }
        ExperimentConfig::load(self.config.as_deref(), &overrides)
    }
}

fn run(args: &RunArgs, kind: ExperimentKind) -> Result<(), HarnessError> {
    let config = args.config.load()?;
    config.validate(kind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| HarnessError::Io(io::Error::other(e)))?;
    let results = pool.install(|| match kind {
        ExperimentKind::SnrSweep => run_snr_sweep(&config),
        ExperimentKind::QosSweep => run_qos_sweep(&config),
    })?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match &args.out {
        Some(path) => emit_results(&results, format, path),
        None => {
            let stdout = io::stdout().lock();
            match format {
                OutputFormat::Csv => write_csv(&results, stdout),
                OutputFormat::Json => write_json(&results, stdout),
            }?;
            io::stdout().flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SnrSweep(args) => run(args, ExperimentKind::SnrSweep),
        Command::QosSweep(args) => run(args, ExperimentKind::QosSweep),
        Command::ValidateConfig { config, kind } => {
            let kind = match kind {
                Kind::SnrSweep => ExperimentKind::SnrSweep,
                Kind::QosSweep => ExperimentKind::QosSweep,
            };
            config.load().and_then(|c| c.validate(kind).map_err(HarnessError::from)).map(|()| {
                println!("configuration is valid");
            })
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
