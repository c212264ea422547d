//! `synthlidar` command line tool.
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 I/O
//! failure, 4 malformed or incompatible input, 5 missing frames, 6 empty
//! scene.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthlidar::eval::EvalConfig;
use synthlidar::pipeline::{
    cmd_evaluate, cmd_generate, cmd_intensity_histogram, cmd_process, cmd_stats, PipelineConfig,
};
use synthlidar::presets::Preset;
use synthlidar::{Error, Executor, Result};

#[derive(Parser)]
#[command(
    name = "synthlidar",
    version,
    about = "Synthetic LiDAR dataset generator and KITTI-style evaluator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Preset name or path to a preset TOML file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Number of frames to generate.
    #[arg(long, value_name = "N")]
    frames: Option<u64>,
    /// Master seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "K")]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan randomized scenes into dense frames under OUT/dense.
    Generate(Common),
    /// Turn dense frames into a KITTI dataset for one preset.
    Process {
        #[command(flatten)]
        common: Common,
        /// Dataset holding dense/ (default: --out).
        #[arg(long, value_name = "DIR")]
        input: Option<PathBuf>,
    },
    /// Score detections against ground truth labels.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Ground truth dataset root.
        #[arg(long, value_name = "DIR")]
        gt: PathBuf,
        /// Detection label directory (or a root holding label_2/).
        #[arg(long, value_name = "DIR")]
        det: PathBuf,
    },
    /// Write label and intensity statistics with plots.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Dataset root.
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
    },
    /// Print (or write to OUT/intensity_histogram.csv) the intensity histogram.
    IntensityHistogram {
        #[command(flatten)]
        common: Common,
        /// Dataset root.
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
}

fn executor(c: &Common) -> Result<Executor> {
    match c.workers {
        Some(0) => Err(Error::Config("--workers must be at least 1".into())),
        Some(k) => Ok(Executor::with_workers(k)),
        None => Ok(Executor::available()),
    }
}

fn config(c: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(n) = c.frames {
        cfg.frame_count = n;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(p) = &c.preset {
        cfg.preset = p.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(c: &Common) -> Result<&Path> {
    c.out
        .as_deref()
        .ok_or_else(|| Error::Config("--out is required".into()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let cfg = config(&c)?;
            let s = cmd_generate(&cfg, out_dir(&c)?, &executor(&c)?)?;
            println!("generated {} frames ({} already present)", s.generated, s.skipped);
        }
        Command::Process { common: c, input } => {
            let cfg = config(&c)?;
            let out = out_dir(&c)?;
            let preset = Preset::resolve(&cfg.preset)?;
            let input = input.as_deref().unwrap_or(out);
            let s = cmd_process(input, out, &preset, &cfg, &executor(&c)?)?;
            println!(
                "{}: {} frames, {} points, {} labels",
                preset.name, s.frames, s.points, s.labels
            );
        }
        Command::Evaluate { common: c, gt, det } => {
            let report = cmd_evaluate(&gt, &det, c.out.as_deref(), &EvalConfig::default(), &executor(&c)?)?;
            print!("{}", report.to_text());
        }
        Command::Stats { common: c, input } => {
            let s = cmd_stats(&input, out_dir(&c)?)?;
            println!("{} frames, {} labels, {} points", s.frames, s.labels, s.points);
            if let Some(m) = s.intensity_mean {
                println!(
                    "intensity mean {m:.4}, zero fraction {:.4}",
                    s.zero_fraction.unwrap_or(0.0)
                );
            }
        }
        Command::IntensityHistogram { common: c, input, bins } => {
            if bins == 0 {
                return Err(Error::Config("--bins must be at least 1".into()));
            }
            let csv = cmd_intensity_histogram(&input, bins)?;
            match &c.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    let p = dir.join("intensity_histogram.csv");
                    std::fs::write(&p, csv).map_err(|e| Error::Io { path: p, source: e })?;
                }
                None => print!("{csv}"),
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
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
