use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use depscale_core::corpus::SynthConfig;
use depscale_core::fusion::FusionSpec;
use depscale_core::models::GridSpec;
use depscale_core::pipeline::{run_pipeline, run_stage, run_synth, RunConfig, Stage};
use depscale_core::{Error, ErrorCategory};

/// PHQ-8 depression-severity estimation from interview landmarks, audio descriptors and transcripts.
///
/// Every flag can also be set through an environment variable named
/// `DEPSCALE_<FLAG>` (for example `DEPSCALE_SEED=3`).
#[derive(Parser, Debug)]
#[command(name = "depscale", version)]
struct Cli {
    /// Log filter (error, warn, info, debug, trace)
    #[arg(long, global = true, env = "DEPSCALE_LOG_LEVEL", default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus and its manifest
    Synth {
        /// Output directory for the corpus
        #[arg(long, env = "DEPSCALE_OUT")]
        out: PathBuf,
        #[arg(long, env = "DEPSCALE_SEED", default_value_t = 0)]
        seed: u64,
        /// Number of sessions
        #[arg(long, env = "DEPSCALE_SESSIONS", default_value_t = 40)]
        sessions: usize,
        /// Session length in seconds
        #[arg(long, env = "DEPSCALE_DURATION", default_value_t = 30.0)]
        duration: f64,
        /// Video frame rate of the generated landmarks
        #[arg(long, env = "DEPSCALE_FPS", default_value_t = 30.0)]
        fps: f64,
    },
    /// Per-session head, video, audio, text features and region descriptors
    Extract(RunArgs),
    /// Fit the GMM and Fisher-encode region descriptors
    Encode(RunArgs),
    /// Train per-item SVM ensembles (and the Fisher regression network)
    Train(RunArgs),
    /// Predict PHQ-8 totals for every session
    Predict(RunArgs),
    /// Fuse per-modality predictions
    Fuse(RunArgs),
    /// Score predictions against the manifest labels
    Eval(RunArgs),
    /// Run extract, encode, train, predict, fuse and eval in order
    Pipeline(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Corpus manifest (JSON)
    #[arg(long, env = "DEPSCALE_MANIFEST")]
    manifest: PathBuf,
    /// Directory for stage artifacts
    #[arg(long, env = "DEPSCALE_OUT")]
    out: PathBuf,
    #[arg(long, env = "DEPSCALE_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, env = "DEPSCALE_JOBS")]
    jobs: Option<usize>,
    /// GMM components
    #[arg(long, env = "DEPSCALE_K", default_value_t = 64)]
    k: usize,
    /// Keep every n-th valid landmark frame for region distances
    #[arg(long, env = "DEPSCALE_SUBSAMPLE", default_value_t = 3)]
    subsample: usize,
    /// Landmark frame rate used for head velocities
    #[arg(long, env = "DEPSCALE_FPS", default_value_t = 30.0)]
    fps: f64,
    /// `mean`, `max` or `weighted:audio=0.5,text=0.5`
    #[arg(long, env = "DEPSCALE_FUSION", default_value = "mean", value_parser = parse_fusion)]
    fusion: FusionSpec,
    /// SVM grid, e.g. `c=-5:15:2,g=-15:3:2,k=rbf`; add `raw` for literal values
    #[arg(long, env = "DEPSCALE_GRID", value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Fusion weight-search spacing
    #[arg(long, env = "DEPSCALE_WEIGHT_STEP", default_value_t = 0.1)]
    weight_step: f64,
    /// Skip the Fisher-vector regression network
    #[arg(long, env = "DEPSCALE_NO_MLP")]
    no_mlp: bool,
    /// Network training epochs
    #[arg(long, env = "DEPSCALE_EPOCHS", default_value_t = 500)]
    epochs: usize,
    /// `eval` only: score this prediction file instead of the stage outputs
    #[arg(long, env = "DEPSCALE_PREDICTIONS")]
    predictions: Option<PathBuf>,
}

fn parse_fusion(s: &str) -> Result<FusionSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        let mut config = RunConfig::new(self.manifest, self.out);
        config.seed = self.seed;
        config.jobs = self.jobs;
        config.k = self.k;
        config.subsample = self.subsample;
        config.fps = self.fps;
        config.fusion = self.fusion;
        if let Some(grid) = self.grid {
            config.grid = grid;
        }
        config.weight_step = self.weight_step;
        config.train_mlp = !self.no_mlp;
        config.mlp.epochs = self.epochs;
        config.predictions = self.predictions;
        config
    }
}

fn run(command: Command) -> depscale_core::Result<()> {
    let (stage, args) = match command {
        Command::Synth { out, seed, sessions, duration, fps } => {
            let config = SynthConfig { duration, fps, ..SynthConfig::default() };
            let manifest = run_synth(&out, seed, sessions, &config)?;
            println!("wrote {} sessions to {}", manifest.len(), out.display());
            return Ok(());
        }
        Command::Pipeline(args) => {
            for row in run_pipeline(&args.into_config())? {
                println!("{}", row.summary());
            }
            return Ok(());
        }
        Command::Extract(a) => (Stage::Extract, a),
        Command::Encode(a) => (Stage::Encode, a),
        Command::Train(a) => (Stage::Train, a),
        Command::Predict(a) => (Stage::Predict, a),
        Command::Fuse(a) => (Stage::Fuse, a),
        Command::Eval(a) => (Stage::Eval, a),
    };
    for row in run_stage(stage, &args.into_config())? {
        println!("{}", row.summary());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(ErrorCategory::Validation.exit_code() as u8);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
