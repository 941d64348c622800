use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdlink::config::{parse_config_with, Overrides, Preset};
use qdlink::output::emit_outputs;
use qdlink::presets::run_preset;
use qdlink::Error;

#[derive(Parser)]
#[command(version, about = "Remote two-photon interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write its CSV tables, summary and config echo.
    Simulate {
        /// hbt, hom-consecutive, qfc-curves, hom-remote, window-sweep, length-sweep,
        /// dispersion-demo or linkbudget
        preset: String,
        /// TOML config; omitted blocks take the default values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let Command::Simulate {
        preset,
        config,
        seed,
        out,
        trials,
        workers,
    } = Cli::parse().command;

    match simulate(&preset, config, seed, out, trials, workers) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn simulate(
    preset: &str,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trials: Option<u64>,
    workers: Option<usize>,
) -> Result<(), Error> {
    let preset: Preset = preset.parse()?;
    let text = match &config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let overrides = Overrides {
        preset: Some(preset),
        master_seed: seed,
        trials,
        output: out.map(|p| p.to_string_lossy().into_owned()),
    };
    let cfg = parse_config_with(&text, &overrides)?;
    let workers = workers
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1);
    log::info!(
        "preset {preset}, seed {}, {workers} workers",
        cfg.master_seed
    );
    let bundle = run_preset(&cfg, workers)?;
    for path in emit_outputs(&bundle, cfg.output.as_ref())? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
