//! Individual pipeline stages.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::{
    csv_preamble, read_json, write_json_compact, FeatureTable, ARTIFACT_FORMAT_VERSION,
};
use super::{RunConfig, AUDIO, FISHER, FISHER_MLP, FUSED, HEAD, SVM_MODALITIES, TEXT, VIDEO};
use crate::audio::{audio_feature_vector, AudioConfig};
use crate::corpus::{
    data_lines, parse_channel_file, parse_labels, parse_landmark_file, parse_lld_file,
    parse_transcript, read_text, write_text, FeatureVector, Phq8Labels, SessionManifest, Split,
    StatSet, PHQ8_ITEMS,
};
use crate::error::{Error, Result};
use crate::fusion::{check_same_sessions, evaluate, fuse, weight_search, PredictionSet};
use crate::fv::{fisher_encode, fisher_names, gmm_fit, FisherOptions, GmmConfig, GmmDocument};
use crate::models::{
    mlp_train, train_item_ensemble, CvRow, GridSpec, ItemEnsemble, MlpModel, Phq8Predictor,
    SvmModel, Targets,
};
use crate::text::{text_features, AffectLexicon, DepressionLexicon, TextConfig};
use crate::video::{
    blink_features, channel_statistics, head_motion_features, reference_face,
    region_distance_series, DEFAULT_CLOSED_SAMPLE, REGION_NAMES,
};

fn feature_path(config: &RunConfig, modality: &str) -> PathBuf {
    config.path(format!("features/{modality}.csv"))
}

fn descriptor_path(config: &RunConfig, id: &str) -> PathBuf {
    config.path(format!("descriptors/{id}.csv"))
}

fn model_path(config: &RunConfig, modality: &str) -> PathBuf {
    config.path(format!("models/{modality}.json"))
}

fn prediction_path(config: &RunConfig, modality: &str) -> PathBuf {
    config.path(format!("predictions/{modality}.csv"))
}

fn ids(sessions: &[SessionManifest]) -> Vec<&str> {
    sessions.iter().map(|s| s.session_id.as_str()).collect()
}

struct Extracted {
    head: FeatureVector<f64>,
    video: FeatureVector<f64>,
    audio: FeatureVector<f64>,
    text: FeatureVector<f64>,
    descriptors: Array2<f64>,
}

fn extract_session(
    config: &RunConfig,
    s: &SessionManifest,
    depression: &DepressionLexicon,
    affect: &AffectLexicon,
) -> Result<Extracted> {
    let context = |e: Error| match e {
        Error::Invalid(m) => Error::Invalid(format!("session {}: {m}", s.session_id)),
        Error::Numeric(m) => Error::Numeric(format!("session {}: {m}", s.session_id)),
        other => other,
    };
    let frames = parse_landmark_file(&s.landmarks)?;
    let transcript = parse_transcript(&s.transcript)?;
    let lld = parse_lld_file(&s.lld)?;
    let channels = parse_channel_file(&s.features)?;

    let head = head_motion_features(&frames, config.fps).map_err(context)?.to_feature_vector();
    let mut video = channel_statistics(&channels, &StatSet::video11()).map_err(context)?;
    let blink_seed = crate::seed::derive_seed(config.seed_for("blink"), &s.session_id);
    video.append(
        blink_features(&frames, s.duration, DEFAULT_CLOSED_SAMPLE, blink_seed)
            .map_err(context)?
            .to_feature_vector(),
    );
    let audio = audio_feature_vector(&lld, &transcript, &AudioConfig::default()).map_err(context)?;
    let text = text_features(&transcript, s.duration, depression, affect, &TextConfig::default())
        .map_err(context)?
        .to_feature_vector();
    let descriptors = region_distance_series(&frames, &reference_face(), config.subsample)
        .map_err(context)?
        .descriptors();
    Ok(Extracted { head, video, audio, text, descriptors })
}

fn write_descriptors(path: &Path, preamble: &str, d: &Array2<f64>) -> Result<()> {
    let mut out = String::from(preamble);
    out.push_str(&REGION_NAMES.join(","));
    out.push('\n');
    for row in d.outer_iter() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

fn read_descriptors(path: &Path) -> Result<Array2<f64>> {
    let text = read_text(path)?;
    let mut flat = Vec::new();
    let mut rows = 0;
    for (row, line) in data_lines(&text).skip(1) {
        let before = flat.len();
        for f in line.split(',') {
            flat.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, row, format!("bad value {f:?}")))?,
            );
        }
        if flat.len() - before != REGION_NAMES.len() {
            return Err(Error::parse(path, row, "expected 10 region distances"));
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, REGION_NAMES.len()), flat)
        .map_err(|e| Error::parse(path, 0, e.to_string()))
}

/// Per-session head, video, audio and text features plus region-distance descriptors.
pub fn run_extract(config: &RunConfig, sessions: &[SessionManifest]) -> Result<()> {
    let depression = DepressionLexicon::bundled();
    let affect = AffectLexicon::bundled();
    let extracted: Vec<Extracted> = sessions
        .par_iter()
        .map(|s| extract_session(config, s, &depression, &affect))
        .collect::<Result<_>>()?;
    let preamble = csv_preamble(config.seed, "extract");
    for (s, e) in sessions.iter().zip(&extracted) {
        write_descriptors(&descriptor_path(config, &s.session_id), &preamble, &e.descriptors)?;
    }
    let table = |pick: fn(&Extracted) -> &FeatureVector<f64>| {
        FeatureTable::from_vectors(
            sessions
                .iter()
                .zip(&extracted)
                .map(|(s, e)| (s.session_id.clone(), pick(e).clone()))
                .collect(),
        )
    };
    table(|e| &e.head)?.write(&feature_path(config, HEAD), &preamble)?;
    table(|e| &e.video)?.write(&feature_path(config, VIDEO), &preamble)?;
    table(|e| &e.audio)?.write(&feature_path(config, AUDIO), &preamble)?;
    table(|e| &e.text)?.write(&feature_path(config, TEXT), &preamble)?;
    log::info!("extracted features for {} sessions", sessions.len());
    Ok(())
}

fn train_sessions(sessions: &[SessionManifest]) -> Vec<&SessionManifest> {
    sessions.iter().filter(|s| s.split == Split::Train).collect()
}

/// Fits the GMM on training-split descriptors and Fisher-encodes every session.
pub fn run_encode(config: &RunConfig, sessions: &[SessionManifest]) -> Result<()> {
    let train = train_sessions(sessions);
    if train.is_empty() {
        return Err(Error::invalid("manifest has no training sessions to fit the GMM"));
    }
    let descriptors: Vec<Array2<f64>> = sessions
        .par_iter()
        .map(|s| read_descriptors(&descriptor_path(config, &s.session_id)))
        .collect::<Result<_>>()?;
    let pooled_views: Vec<_> = sessions
        .iter()
        .zip(&descriptors)
        .filter(|(s, _)| s.split == Split::Train)
        .map(|(_, d)| d.view())
        .collect();
    let pooled = ndarray::concatenate(Axis(0), &pooled_views)
        .map_err(|e| Error::invalid(format!("cannot pool descriptors: {e}")))?;
    let gmm_config = GmmConfig {
        components: config.k,
        seed: config.seed_for("gmm"),
        ..GmmConfig::default()
    };
    let fit = gmm_fit(pooled.view(), &gmm_config)?;
    log::info!(
        "GMM: {} descriptors, {} EM steps, converged={}",
        pooled.nrows(),
        fit.log_likelihood.len() - 1,
        fit.converged
    );
    let options = FisherOptions::default();
    let doc = GmmDocument::new(fit.model, &gmm_config, options);
    doc.save(&model_path(config, "gmm"))?;

    let names = fisher_names(doc.components, doc.dim);
    let rows: Vec<(String, FeatureVector<f64>)> = sessions
        .par_iter()
        .zip(&descriptors)
        .map(|(s, d)| {
            let fv = fisher_encode(&doc.model, d.view(), options)?;
            Ok((
                s.session_id.clone(),
                FeatureVector { names: names.clone(), values: fv.values },
            ))
        })
        .collect::<Result<_>>()?;
    FeatureTable::from_vectors(rows)?
        .write(&feature_path(config, FISHER), &csv_preamble(config.seed, "encode"))
}

/// Serialized item ensemble for one modality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub modality: String,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub grid: GridSpec,
    pub ensemble: ItemEnsemble<SvmModel<f64>>,
}

/// Serialized regression network for one modality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpDocument {
    pub format_version: u32,
    pub modality: String,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub epoch_loss: Vec<f64>,
    pub model: MlpModel<f64>,
}

fn load_truth(sessions: &[SessionManifest]) -> Result<BTreeMap<String, Phq8Labels>> {
    let labelled: Vec<(String, Phq8Labels)> = sessions
        .par_iter()
        .filter_map(|s| s.labels.as_ref().map(|p| (s, p)))
        .map(|(s, p)| Ok((s.session_id.clone(), parse_labels(p)?)))
        .collect::<Result<_>>()?;
    Ok(labelled.into_iter().collect())
}

fn read_table(config: &RunConfig, modality: &str, sessions: &[SessionManifest]) -> Result<FeatureTable> {
    let table = FeatureTable::read(&feature_path(config, modality))?;
    check_same_sessions(table.ids.iter().map(String::as_str), ids(sessions))?;
    Ok(table)
}

/// Grid-searched SVM ensembles per modality (plus the Fisher regression network).
pub fn run_train(config: &RunConfig, sessions: &[SessionManifest]) -> Result<()> {
    let truth = load_truth(sessions)?;
    let train_ids: Vec<&str> = train_sessions(sessions)
        .into_iter()
        .map(|s| s.session_id.as_str())
        .filter(|id| truth.contains_key(*id))
        .collect();
    if train_ids.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 labelled training sessions, found {}",
            train_ids.len()
        )));
    }
    let labels: Vec<Phq8Labels> = train_ids.iter().map(|id| truth[*id]).collect();
    let tables: Vec<FeatureTable> = SVM_MODALITIES
        .iter()
        .map(|m| read_table(config, m, sessions))
        .collect::<Result<_>>()?;

    let trained: Vec<_> = SVM_MODALITIES
        .par_iter()
        .zip(&tables)
        .map(|(m, table)| {
            let x = table.select(&train_ids)?;
            let seed = config.seed_for(&format!("train/{m}"));
            let (ensemble, cv) = train_item_ensemble(x.view(), &labels, &config.grid, seed)?;
            Ok((m, seed, ensemble, cv))
        })
        .collect::<Result<_>>()?;

    let preamble = csv_preamble(config.seed, "train");
    for ((m, seed, ensemble, cv), table) in trained.into_iter().zip(&tables) {
        let doc = ModelDocument {
            format_version: ARTIFACT_FORMAT_VERSION,
            modality: m.to_string(),
            seed,
            feature_names: table.names.clone(),
            grid: config.grid.clone(),
            ensemble,
        };
        write_json_compact(&model_path(config, m), &doc)?;
        let mut report = preamble.clone();
        report.push_str(&format!("item,{},selected\n", CvRow::CSV_HEADER));
        for (item, result) in PHQ8_ITEMS.iter().zip(&cv) {
            for row in &result.table {
                let selected = u8::from(row == &result.best);
                report.push_str(&format!("{item},{row},{selected}\n"));
            }
        }
        write_text(&config.path(format!("reports/cv_{m}.csv")), &report)?;
        log::info!("trained {m} ensemble");
    }

    if config.train_mlp {
        let table = &tables[SVM_MODALITIES.iter().position(|m| *m == FISHER).expect("fisher modality")];
        let x = table.select(&train_ids)?;
        let targets = Array2::from_shape_fn((labels.len(), PHQ8_ITEMS.len()), |(r, k)| {
            f64::from(labels[r].items()[k])
        });
        let seed = config.seed_for(&format!("train/{FISHER_MLP}"));
        let mlp_config = crate::models::MlpConfig { seed, ..config.mlp.clone() };
        let fit = mlp_train(x.view(), Targets::Values(targets.view()), &mlp_config)?;
        let doc = MlpDocument {
            format_version: ARTIFACT_FORMAT_VERSION,
            modality: FISHER_MLP.to_string(),
            seed,
            feature_names: table.names.clone(),
            epoch_loss: fit.epoch_loss,
            model: fit.model,
        };
        write_json_compact(&model_path(config, FISHER_MLP), &doc)?;
    }
    Ok(())
}

fn check_names(modality: &str, expected: &[String], table: &FeatureTable) -> Result<()> {
    if expected != table.names.as_slice() {
        return Err(Error::invalid(format!(
            "{modality}: feature columns differ from those the model was trained on"
        )));
    }
    Ok(())
}

fn totals_to_set(modality: &str, ids: &[String], totals: Vec<u8>) -> Result<PredictionSet> {
    PredictionSet::new(
        modality,
        ids.iter().cloned().zip(totals.into_iter().map(f64::from)).collect(),
    )
}

/// PHQ-8 totals for every session from every trained model.
pub fn run_predict(config: &RunConfig, sessions: &[SessionManifest]) -> Result<()> {
    let preamble = csv_preamble(config.seed, "predict");
    for m in SVM_MODALITIES {
        let doc: ModelDocument = read_json(&model_path(config, m))?;
        let table = read_table(config, m, sessions)?;
        check_names(m, &doc.feature_names, &table)?;
        let totals = doc.ensemble.predict_totals(table.values.view())?;
        totals_to_set(m, &table.ids, totals)?.write(&prediction_path(config, m), &preamble)?;
    }
    if config.train_mlp {
        let doc: MlpDocument = read_json(&model_path(config, FISHER_MLP))?;
        let table = read_table(config, FISHER, sessions)?;
        check_names(FISHER_MLP, &doc.feature_names, &table)?;
        let totals = doc.model.predict_totals(table.values.view())?;
        totals_to_set(FISHER_MLP, &table.ids, totals)?
            .write(&prediction_path(config, FISHER_MLP), &preamble)?;
    }
    Ok(())
}

fn split_ids<'a>(
    sessions: &'a [SessionManifest],
    truth: &BTreeMap<String, Phq8Labels>,
    split: Split,
) -> BTreeSet<&'a str> {
    sessions
        .iter()
        .filter(|s| s.split == split && truth.contains_key(&s.session_id))
        .map(|s| s.session_id.as_str())
        .collect()
}

fn restrict_truth(truth: &BTreeMap<String, Phq8Labels>, ids: &BTreeSet<&str>) -> BTreeMap<String, Phq8Labels> {
    truth
        .iter()
        .filter(|(k, _)| ids.contains(k.as_str()))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

/// Fuses the configured modalities; searches fusion weights on labelled dev sessions.
pub fn run_fuse(config: &RunConfig, sessions: &[SessionManifest]) -> Result<()> {
    let modalities = config.fusion_modalities();
    let sets: Vec<PredictionSet> = modalities
        .iter()
        .map(|m| PredictionSet::read(&prediction_path(config, m), m.as_str()))
        .collect::<Result<_>>()?;
    let preamble = csv_preamble(config.seed, "fuse");
    fuse(&sets, &config.fusion)?.write(&prediction_path(config, FUSED), &preamble)?;

    let truth = load_truth(sessions)?;
    let dev = split_ids(sessions, &truth, Split::Dev);
    if sets.len() >= 2 && !dev.is_empty() {
        let dev_sets: Vec<PredictionSet> = sets.iter().map(|s| s.restrict(&dev)).collect();
        let search = weight_search(&dev_sets, &restrict_truth(&truth, &dev), config.weight_step)?;
        let mut report = search.to_csv(&preamble, &modalities);
        report.push_str(&format!(
            "# best {} RMSE={:.6} MAE={:.6}\n",
            search.best, search.best_row.rmse, search.best_row.mae
        ));
        write_text(&config.path("reports/weight_search.csv"), &report)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub modality: String,
    pub split: Split,
    pub sessions: usize,
    pub rmse: f64,
    pub mae: f64,
}

impl EvalRow {
    pub fn summary(&self) -> String {
        format!(
            "{} {} n={} RMSE={:.6} MAE={:.6}",
            self.modality,
            self.split.as_str(),
            self.sessions,
            self.rmse,
            self.mae
        )
    }
}

/// RMSE / MAE per prediction set and split, plus a predict-the-training-mean baseline.
pub fn run_eval(config: &RunConfig, sessions: &[SessionManifest]) -> Result<Vec<EvalRow>> {
    let truth = load_truth(sessions)?;
    let mut sets: Vec<PredictionSet> = match &config.predictions {
        Some(p) => {
            let name = p.file_stem().map_or("predictions".into(), |s| s.to_string_lossy().into_owned());
            vec![PredictionSet::read(p, name)?]
        }
        None => {
            let mut names: Vec<&str> = SVM_MODALITIES.to_vec();
            if config.train_mlp {
                names.push(FISHER_MLP);
            }
            names.push(FUSED);
            names
                .into_iter()
                .map(|m| PredictionSet::read(&prediction_path(config, m), m))
                .collect::<Result<_>>()?
        }
    };
    for s in &sets {
        check_same_sessions(s.ids(), ids(sessions))?;
    }
    let train = split_ids(sessions, &truth, Split::Train);
    if !train.is_empty() {
        let mean = train.iter().map(|id| f64::from(truth[*id].total())).sum::<f64>() / train.len() as f64;
        sets.push(PredictionSet::new(
            "mean_baseline",
            sessions.iter().map(|s| (s.session_id.clone(), mean)).collect(),
        )?);
    }
    let mut rows = Vec::new();
    for set in &sets {
        for split in [Split::Train, Split::Dev, Split::Test] {
            let ids = split_ids(sessions, &truth, split);
            if ids.is_empty() {
                continue;
            }
            let report = evaluate(&set.restrict(&ids), &restrict_truth(&truth, &ids))?;
            rows.push(EvalRow {
                modality: set.modality.clone(),
                split,
                sessions: report.count(),
                rmse: report.rmse,
                mae: report.mae,
            });
        }
    }
    let mut csv = csv_preamble(config.seed, "eval");
    csv.push_str("modality,split,sessions,rmse,mae\n");
    let mut summary = String::new();
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.modality,
            r.split.as_str(),
            r.sessions,
            r.rmse,
            r.mae
        ));
        summary.push_str(&r.summary());
        summary.push('\n');
    }
    write_text(&config.path("reports/eval.csv"), &csv)?;
    write_text(&config.path("reports/eval.txt"), &summary)?;
    Ok(rows)
}
