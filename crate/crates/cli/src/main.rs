//! `mretarget`: curate source motions, retarget them onto a humanoid and
//! score the results.
//!
//! Settings are resolved in this order, first match wins: command-line
//! flags, the configuration file (`--config` or `MRETARGET_CONFIG`), the
//! built-in defaults. Progress and failures go to stderr; results go to
//! files only.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use motion_retarget::io::{save_json, save_retargeted_motion, save_robot_model, save_source_motion};
use motion_retarget::pipeline::{
    collect_inputs, dry_run, run_curate, run_metrics, run_pipeline, run_retarget, PipelineConfig, StageSummary,
};
use motion_retarget::retarget::Mode;
use motion_retarget::synth::{synthetic_suite, test_correspondence_entries, test_humanoid};

#[derive(Parser)]
#[command(
    name = "mretarget",
    version,
    about = "Motion curation and physics-constrained humanoid retargeting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut source files into clips and keep the ones that pass the filters.
    Curate {
        /// Source motion files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Retarget clips onto the robot, writing a motion and a loss trace each.
    Retarget {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Score retargeted motions against their source clips, paired by file stem.
    Metrics {
        /// Retargeted motion file or directory.
        retargeted: PathBuf,
        /// Source clip file or directory.
        sources: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Curate, retarget and score in one go.
    Pipeline {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Write the synthetic test suite, the test humanoid and its
    /// correspondence.
    Synth {
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Shared {
    /// Pipeline configuration file (JSON).
    #[arg(long, env = "MRETARGET_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, required_unless_present = "dry_run")]
    output: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for the initialization jitter.
    #[arg(long)]
    seed: Option<u64>,
    /// Loss configuration: ik, sink, +feasibility, +ground or physink.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Optimizer iterations per clip.
    #[arg(long)]
    iterations: Option<usize>,
    /// Validate the configuration and inputs without writing anything.
    #[arg(long)]
    dry_run: bool,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: motion_retarget::Error| e.to_string())
}

impl Shared {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(s) = self.seed {
            cfg.optimizer.seed = s;
        }
        if let Some(m) = self.mode {
            cfg.optimizer = cfg.optimizer.with_mode(m);
        }
        if let Some(n) = self.iterations {
            cfg.optimizer.iterations = n;
        }
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }

    fn output(&self) -> Result<&Path> {
        self.output.as_deref().context("--output is required")
    }
}

fn report(stage: &str, summary: &StageSummary) -> ExitCode {
    eprintln!(
        "{stage}: {} items processed, {} files written, {} failures",
        summary.processed,
        summary.written.len(),
        summary.failures.len()
    );
    for f in &summary.failures {
        let input = f.input.display().to_string();
        if f.message.contains(&input) {
            eprintln!("  {}", f.message);
        } else {
            eprintln!("  {input}: {}", f.message);
        }
    }
    if summary.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn check_only(inputs: &[PathBuf], cfg: &PipelineConfig) -> Result<ExitCode> {
    let n = dry_run(inputs, cfg)?;
    eprintln!("dry run: configuration and {n} inputs are valid, nothing written");
    Ok(ExitCode::SUCCESS)
}

fn write_synth(out: &Path) -> Result<ExitCode> {
    let model = test_humanoid();
    let sources = out.join("sources");
    let truth = out.join("truth");
    for dir in [&sources, &truth] {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let suite = synthetic_suite(&model);
    for c in &suite {
        save_source_motion(&c.source, sources.join(format!("{}.json", c.name)))?;
        save_retargeted_motion(&c.truth, truth.join(format!("{}.json", c.name)))?;
    }
    save_robot_model(&model, out.join("robot.json"))?;
    save_json(&test_correspondence_entries(), out.join("correspondence.json"))?;
    eprintln!("synth: {} clips written to {}", suite.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Curate { inputs, shared } => {
            let cfg = shared.config()?;
            if shared.dry_run {
                // Curation needs no robot, so only the inputs are checked.
                let files = collect_inputs(&inputs)?;
                for f in &files {
                    motion_retarget::io::load_source_motion(f)?;
                }
                eprintln!(
                    "dry run: configuration and {} inputs are valid, nothing written",
                    files.len()
                );
                return Ok(ExitCode::SUCCESS);
            }
            Ok(report("curate", &run_curate(&inputs, &cfg, shared.output()?)?))
        }
        Command::Retarget { inputs, shared } => {
            let cfg = shared.config()?;
            if shared.dry_run {
                return check_only(&inputs, &cfg);
            }
            Ok(report("retarget", &run_retarget(&inputs, &cfg, shared.output()?)?))
        }
        Command::Metrics {
            retargeted,
            sources,
            shared,
        } => {
            let cfg = shared.config()?;
            if shared.dry_run {
                cfg.resources()?;
                let (r, s) = (collect_inputs(&[retargeted])?, collect_inputs(&[sources])?);
                eprintln!(
                    "dry run: {} retargeted and {} source files found, nothing written",
                    r.len(),
                    s.len()
                );
                return Ok(ExitCode::SUCCESS);
            }
            Ok(report(
                "metrics",
                &run_metrics(&[retargeted], &[sources], &cfg, shared.output()?)?,
            ))
        }
        Command::Pipeline { inputs, shared } => {
            let cfg = shared.config()?;
            if shared.dry_run {
                return check_only(&inputs, &cfg);
            }
            let out = shared.output()?;
            if out.exists() && !out.is_dir() {
                bail!("{} exists and is not a directory", out.display());
            }
            Ok(report("pipeline", &run_pipeline(&inputs, &cfg, out)?))
        }
        Command::Synth { output } => write_synth(&output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
