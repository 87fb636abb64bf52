mod config;
mod error;
mod plot;
mod run;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{emit_plot_data, PlotKind};

#[derive(Debug, Parser)]
#[command(
    name = "fires",
    version,
    about = "Online feature selection on data streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a prequential experiment or grid from a TOML (or echoed JSON) config.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the metrics output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract plot-ready CSV from a metrics file.
    Plot {
        metrics: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.run.seed = seed;
            }
            if out.is_some() {
                cfg.run.out = out;
            }
            run::run(&cfg)
        }
        Command::Plot { metrics, kind, out } => {
            let input = BufReader::new(File::open(&metrics)?);
            let mut sink: Box<dyn Write> = match out {
                Some(path) => Box::new(BufWriter::new(File::create(path)?)),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            emit_plot_data(input, kind, &mut sink)?;
            sink.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
