use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cimbench::config::{load_config, parse_sweep, RunConfig};
use cimbench::harness::{run_benchmark, run_sweep};
use cimbench::{Error, Result};

/// Benchmark on-chip training on compute-in-memory accelerators.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train once and write the report suite.
    Run(Common),
    /// Repeat a run over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter grid, e.g. `c2c_sigma=0,0.01,0.03,0.05`.
        #[arg(long, value_name = "PARAM=GRID")]
        sweep: String,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Device name from the catalog (or the config's inline catalog).
    #[arg(long)]
    device: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    buffer_overhead_constraint: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.device) {
            (Some(p), _) => load_config(p)?,
            (None, Some(d)) => RunConfig::for_device(d),
            (None, None) => return Err(Error::validation("device", "give --config or --device")),
        };
        if let Some(d) = &self.device {
            cfg.device = cimbench::config::DeviceRef::Name(d.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = self.epochs {
            cfg.schedule.epochs = e;
        }
        if let Some(o) = &self.output_dir {
            cfg.output_dir = o.clone();
        }
        if let Some(r) = self.buffer_overhead_constraint {
            cfg.buffer_overhead_constraint = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn progress(line: &str) {
    println!("{line}");
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let out = run_benchmark(&cfg, &progress)?;
            println!("wrote {} files to {}", out.files.len(), out.output_dir.display());
        }
        Command::Sweep { common, sweep } => {
            let cfg = common.config()?;
            let (param, values) = parse_sweep(&sweep)?;
            let outs = run_sweep(&cfg, &param, &values, &progress)?;
            for (label, o) in outs {
                let last = o.reports.last().map(|r| r.accuracy).unwrap_or(f64::NAN);
                println!("{label}: final accuracy {last:.4} -> {}", o.output_dir.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
