//! `dlm`: run learning-machine experiments and write their results as CSV.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dlm_core::harness::{
    emit_csv, find_preset, parse_kv, run_scenario, ExperimentConfig, ResultTable, Scenario, PRESETS,
};

#[derive(Parser)]
#[command(
    name = "dlm",
    version,
    about = "Event-by-event learning-machine experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Dlm,
    Slm,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key = value configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        /// Events per block.
        #[arg(long)]
        events: Option<u64>,
        #[arg(long)]
        blocks: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List scenarios and figure presets.
    ListScenarios,
    /// Run a figure preset (`fig1`, `fig5`, …, or a preset name).
    Reproduce {
        figure: String,
        /// Override the preset's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write(table: &ResultTable, out: Option<&Path>) -> dlm_core::Result<()> {
    match out {
        Some(path) => emit_csv(table, path),
        None => table.write_csv(std::io::stdout().lock()),
    }
}

fn execute(cli: Cli) -> dlm_core::Result<()> {
    match cli.command {
        Command::Run {
            config,
            alpha,
            events,
            blocks,
            seed,
            backend,
            out,
        } => {
            let mut map = parse_kv(&std::fs::read_to_string(&config)?)?;
            let mut set = |k: &str, v: Option<String>| {
                if let Some(v) = v {
                    map.insert(k.to_string(), v);
                }
            };
            set("alpha", alpha.map(|v| v.to_string()));
            set("events", events.map(|v| v.to_string()));
            set("blocks", blocks.map(|v| v.to_string()));
            set("seed", seed.map(|v| v.to_string()));
            set(
                "backend",
                backend.map(|b| match b {
                    Backend::Dlm => "dlm".to_string(),
                    Backend::Slm => "slm".to_string(),
                }),
            );
            let cfg = ExperimentConfig::from_map(&map)?;
            write(&run_scenario(&cfg)?, out.as_deref())
        }
        Command::ListScenarios => {
            println!("scenarios:");
            for s in Scenario::ALL {
                println!("  {:<18} {}", s.name(), s.description());
            }
            println!("presets (dlm reproduce <name|alias>):");
            for p in PRESETS {
                let aliases = if p.aliases.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", p.aliases.join(", "))
                };
                println!("  {:<18} {}{aliases}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Reproduce { figure, seed, out } => {
            let mut cfg = find_preset(&figure)?.experiment()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            write(&run_scenario(&cfg)?, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
