//! Stage orchestration: extract, encode, train, predict, fuse and evaluate.
//!
//! Every stage reads its inputs from and writes its artifacts under
//! [`RunConfig::out`]. Artifacts are deterministic functions of the inputs and
//! the run seed, so re-running a stage reproduces its files byte for byte.

mod artifacts;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use artifacts::{
    csv_preamble, read_json, write_json, write_json_compact, FeatureTable, ARTIFACT_FORMAT_VERSION,
};
pub use stages::{
    run_encode, run_eval, run_extract, run_fuse, run_predict, run_train, EvalRow, MlpDocument,
    ModelDocument,
};

use crate::audio::DEFAULT_DCT_COEFFS;
use crate::corpus::{generate_corpus, SessionManifest, SynthConfig, MANIFEST_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::fusion::FusionSpec;
use crate::fv::{GMM_FORMAT_VERSION, DEFAULT_COMPONENTS};
use crate::models::{GridSpec, MlpConfig};
use crate::seed::derive_seed;
use crate::video::{DEFAULT_FPS, DEFAULT_SUBSAMPLE};

pub const HEAD: &str = "head";
pub const VIDEO: &str = "video";
pub const AUDIO: &str = "audio";
pub const TEXT: &str = "text";
pub const FISHER: &str = "fisher";
pub const FISHER_MLP: &str = "fisher_mlp";
pub const FUSED: &str = "fused";

/// Modalities with an SVM item ensemble.
pub const SVM_MODALITIES: [&str; 5] = [HEAD, VIDEO, AUDIO, TEXT, FISHER];
/// Modalities fused by `mean` / `max` unless weights name others.
pub const DEFAULT_FUSION_MODALITIES: [&str; 4] = [AUDIO, TEXT, FISHER, HEAD];

pub const METADATA_FILE: &str = "run_metadata.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Extract,
    Encode,
    Train,
    Predict,
    Fuse,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Extract,
        Stage::Encode,
        Stage::Train,
        Stage::Predict,
        Stage::Fuse,
        Stage::Eval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Encode => "encode",
            Stage::Train => "train",
            Stage::Predict => "predict",
            Stage::Fuse => "fuse",
            Stage::Eval => "eval",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown stage {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// GMM components.
    pub k: usize,
    /// Keep every n-th valid frame for region distances.
    pub subsample: usize,
    pub fps: f64,
    pub fusion: FusionSpec,
    pub grid: GridSpec,
    pub mlp: MlpConfig,
    /// Also train the 8-output regression network on Fisher vectors.
    pub train_mlp: bool,
    /// Fusion weight-search lattice spacing.
    pub weight_step: f64,
    /// Evaluate this prediction file instead of the stage outputs.
    pub predictions: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            out: out.into(),
            seed: 0,
            jobs: None,
            k: DEFAULT_COMPONENTS,
            subsample: DEFAULT_SUBSAMPLE,
            fps: DEFAULT_FPS,
            fusion: FusionSpec::equal_mean(),
            grid: GridSpec::default(),
            mlp: MlpConfig::regression(),
            train_mlp: true,
            weight_step: 0.1,
            predictions: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("--k must be at least 1"));
        }
        if self.subsample == 0 {
            return Err(Error::invalid("--subsample must be at least 1"));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::invalid("--fps must be positive"));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        self.grid.validate()?;
        self.mlp.validate()
    }

    /// Named per-component seeds fanned out from [`seed`](Self::seed).
    pub fn seed_for(&self, tag: &str) -> u64 {
        derive_seed(self.seed, tag)
    }

    pub fn fusion_modalities(&self) -> Vec<String> {
        if self.fusion.weights.is_empty() {
            DEFAULT_FUSION_MODALITIES.iter().map(|s| s.to_string()).collect()
        } else {
            self.fusion.weights.keys().cloned().collect()
        }
    }

    pub fn path(&self, relative: impl AsRef<Path>) -> PathBuf {
        self.out.join(relative)
    }

    fn seed_table(&self) -> BTreeMap<String, u64> {
        let mut seeds = BTreeMap::from([("run".to_string(), self.seed)]);
        seeds.insert("gmm".into(), self.seed_for("gmm"));
        seeds.insert("blink".into(), self.seed_for("blink"));
        for m in SVM_MODALITIES {
            seeds.insert(format!("train/{m}"), self.seed_for(&format!("train/{m}")));
        }
        seeds.insert(format!("train/{FISHER_MLP}"), self.seed_for(&format!("train/{FISHER_MLP}")));
        seeds
    }

    /// Runs `f` on a thread pool bounded by [`jobs`](Self::jobs).
    pub fn in_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        match self.jobs {
            None => Ok(f()),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|pool| pool.install(f))
                .map_err(|e| Error::Numeric(format!("cannot start worker pool: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StageRecord {
    seeds: BTreeMap<String, u64>,
    k: usize,
    subsample: usize,
    fps: f64,
    dct_coeffs: usize,
    fusion: String,
    grid: GridSpec,
    mlp: Option<MlpConfig>,
    weight_step: f64,
    manifest_digest: String,
    sessions: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct RunMetadata {
    format_version: u32,
    formats: BTreeMap<String, u32>,
    stages: BTreeMap<Stage, StageRecord>,
}

fn digest(text: &str) -> String {
    format!("{:016x}", derive_seed(0, text))
}

/// Records the settings a stage ran with in `run_metadata.json`, keeping other stages' entries.
fn record_stage(config: &RunConfig, stage: Stage, sessions: &[SessionManifest]) -> Result<()> {
    let path = config.path(METADATA_FILE);
    let mut meta: RunMetadata = if path.exists() {
        read_json(&path)?
    } else {
        RunMetadata::default()
    };
    meta.format_version = ARTIFACT_FORMAT_VERSION;
    meta.formats = BTreeMap::from([
        ("artifact".to_string(), ARTIFACT_FORMAT_VERSION),
        ("gmm".to_string(), GMM_FORMAT_VERSION),
        ("manifest".to_string(), MANIFEST_FORMAT_VERSION),
    ]);
    let manifest_text = std::fs::read_to_string(&config.manifest).unwrap_or_default();
    meta.stages.insert(
        stage,
        StageRecord {
            seeds: config.seed_table(),
            k: config.k,
            subsample: config.subsample,
            fps: config.fps,
            dct_coeffs: DEFAULT_DCT_COEFFS,
            fusion: config.fusion.to_string(),
            grid: config.grid.clone(),
            mlp: config.train_mlp.then(|| config.mlp.clone()),
            weight_step: config.weight_step,
            manifest_digest: digest(&manifest_text),
            sessions: sessions.len(),
        },
    );
    write_json(&path, &meta)
}

/// Runs one stage and records it in the run metadata.
pub fn run_stage(stage: Stage, config: &RunConfig) -> Result<Vec<EvalRow>> {
    config.validate()?;
    let sessions = crate::corpus::load_manifest(&config.manifest)?;
    log::info!("stage {stage}: {} sessions", sessions.len());
    let rows = config.in_pool(|| -> Result<Vec<EvalRow>> {
        match stage {
            Stage::Extract => run_extract(config, &sessions).map(|_| Vec::new()),
            Stage::Encode => run_encode(config, &sessions).map(|_| Vec::new()),
            Stage::Train => run_train(config, &sessions).map(|_| Vec::new()),
            Stage::Predict => run_predict(config, &sessions).map(|_| Vec::new()),
            Stage::Fuse => run_fuse(config, &sessions).map(|_| Vec::new()),
            Stage::Eval => run_eval(config, &sessions),
        }
    })??;
    record_stage(config, stage, &sessions)?;
    Ok(rows)
}

/// Every stage in order; returns the evaluation rows.
pub fn run_pipeline(config: &RunConfig) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    for stage in Stage::ALL {
        rows = run_stage(stage, config)?;
    }
    Ok(rows)
}

/// Writes a synthetic corpus and its manifest under `out`.
pub fn run_synth(out: &Path, seed: u64, sessions: usize, config: &SynthConfig) -> Result<Vec<SessionManifest>> {
    if sessions == 0 {
        return Err(Error::invalid("--sessions must be at least 1"));
    }
    generate_corpus(seed, sessions, out, config)
}
