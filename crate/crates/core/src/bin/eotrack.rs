use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eotrack::pipeline::{self, PipelineConfig, PipelineError};

#[derive(Parser)]
#[command(name = "eotrack", version, about = "Detect and track a box-shaped robot in point cloud sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the ground plane from the first frame and write plane.json.
    InitGround(Common),
    /// Detect and track over the input; writes plane.json, detections.jsonl, track.jsonl
    /// and, with ground truth, gt.jsonl and metrics.json.
    Run(Common),
    /// Render a scenario to <out>/frames with truth.json and gt.jsonl.
    Simulate(Common),
    /// Score the artifacts in --out against ground truth and rewrite metrics.json.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Ground-truth JSONL (default <out>/gt.jsonl).
        #[arg(long)]
        gt: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config value, e.g. --set detection.dbscan.eps=0.05 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = PipelineConfig::load(self.config.as_deref(), &self.set)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    // a closed stdout (e.g. piped into head) is not an error
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::InitGround(c) => print_json(&pipeline::init_ground(&c.config()?)?),
        Command::Run(c) => {
            let cfg = c.config()?;
            let out = pipeline::run_pipeline(&cfg)?;
            match &out.metrics {
                Some(m) => print_json(m),
                None => log::info!("{} frames processed, no ground truth", out.detections.len()),
            }
            log::info!("artifacts in {}", cfg.output.display());
        }
        Command::Simulate(c) => print_json(&pipeline::simulate(&c.config()?)?),
        Command::Evaluate { common, gt } => {
            let cfg = common.config()?;
            print_json(&pipeline::evaluate(&cfg.output, gt.as_deref(), &cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
