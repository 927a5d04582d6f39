use std::collections::BTreeMap;

use depscale_core::audio::{dct2, idct2, participant_mask};
use depscale_core::corpus::{
    descriptive_stats, LldFrameSeries, Speaker, StatSet, Statistic, TranscriptEntry,
};
use depscale_core::fusion::{fuse, EvalReport, FusionSpec, PredictionSet, SCORE_MAX};
use depscale_core::fv::{fisher_encode, FisherOptions, GmmModel};
use depscale_core::models::{regression_items, stratified_folds};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn small_model() -> GmmModel<f64> {
    GmmModel {
        weights: Array1::from(vec![0.2, 0.5, 0.3]),
        means: ndarray::array![[0.0, 0.0], [3.0, -1.0], [-2.0, 4.0]],
        variances: ndarray::array![[1.0, 0.5], [0.3, 2.0], [1.5, 1.5]],
        variance_floor: Array1::from(vec![1e-6, 1e-6]),
    }
}

fn entry(start: f64, stop: f64, speaker: Speaker) -> TranscriptEntry {
    TranscriptEntry {
        start_time: start,
        stop_time: stop,
        speaker,
        tokens: vec!["word".into()],
    }
}

fn series(frames: usize) -> LldFrameSeries<f64> {
    LldFrameSeries::new(0.01, vec!["F0".into()], vec![vec![0.0; frames]], None).unwrap()
}

proptest! {
    #[test]
    fn posteriors_sum_to_one(x in -50.0..50.0f64, y in -50.0..50.0f64) {
        let p = small_model().posteriors(ndarray::aview1(&[x, y]));
        let total: f64 = p.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn fisher_vector_shape_and_norm(data in prop::collection::vec(-10.0..10.0f64, 2..200)) {
        let rows = data.len() / 2;
        let d = Array2::from_shape_vec((rows, 2), data[..rows * 2].to_vec()).unwrap();
        let fv = fisher_encode(&small_model(), d.view(), FisherOptions::default()).unwrap();
        prop_assert_eq!(fv.len(), 2 * 3 * 2);
        prop_assert!((fv.norm() - 1.0).abs() < 1e-9 || fv.norm() == 0.0);
    }

    #[test]
    fn adding_speech_never_shrinks_the_mask(
        turns in prop::collection::vec((0.0..9.0f64, 0.05..2.0f64), 1..8),
        extra in (0.0..9.0f64, 0.05..2.0f64),
    ) {
        let s = series(1000);
        let mut transcript: Vec<_> =
            turns.iter().map(|&(a, len)| entry(a, a + len, Speaker::Participant)).collect();
        let before = participant_mask(&transcript, &s).unwrap();
        transcript.push(entry(extra.0, extra.0 + extra.1, Speaker::Participant));
        transcript.push(entry(extra.1, extra.1 + 3.0, Speaker::Interviewer));
        transcript.sort_by(|a, b| a.start_time.total_cmp(&b.start_time));
        let after = participant_mask(&transcript, &s).unwrap();
        for (b, a) in before.selected.iter().zip(&after.selected) {
            prop_assert!(!b || *a);
        }
    }

    #[test]
    fn dct_round_trip(x in prop::collection::vec(-1e3..1e3f64, 1..300)) {
        let back = idct2(&dct2(&x));
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn dct_preserves_energy(x in prop::collection::vec(-10.0..10.0f64, 1..128)) {
        let e: f64 = x.iter().map(|v| v * v).sum();
        let c: f64 = dct2(&x).iter().map(|v| v * v).sum();
        prop_assert!((e - c).abs() <= 1e-9 * e.max(1.0));
    }

    #[test]
    fn fused_scores_stay_in_range(
        rows in prop::collection::vec(prop::collection::vec(0.0..=24.0f64, 3), 1..20),
        w in 0.0..=1.0f64,
    ) {
        let sets: Vec<PredictionSet> = (0..3)
            .map(|m| {
                let scores = rows.iter().enumerate().map(|(i, r)| (format!("s{i:03}"), r[m])).collect();
                PredictionSet::new(format!("m{m}"), scores).unwrap()
            })
            .collect();
        let weights: BTreeMap<String, f64> =
            [("m0".to_string(), w), ("m1".to_string(), (1.0 - w) / 2.0), ("m2".to_string(), (1.0 - w) / 2.0)].into();
        for spec in [FusionSpec::max(), FusionSpec::equal_mean(), FusionSpec::weighted(weights).unwrap()] {
            let fused = fuse(&sets, &spec).unwrap();
            for (i, v) in fused.scores.values().enumerate() {
                let lo = rows[i].iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = rows[i].iter().cloned().fold(0.0, f64::max);
                prop_assert!((0.0..=SCORE_MAX).contains(v));
                prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn rmse_bounds_mae(res in prop::collection::vec(-24.0..24.0f64, 1..60)) {
        let map = res.iter().enumerate().map(|(i, &r)| (format!("s{i}"), r)).collect();
        let rep = EvalReport::from_residuals(map).unwrap();
        prop_assert!(rep.rmse + 1e-12 >= rep.mae);
        prop_assert!(rep.mae >= 0.0);
    }

    #[test]
    fn affine_maps_of_statistics(
        x in prop::collection::vec(-100.0..100.0f64, 3..80),
        a in prop::sample::select(vec![-3.5, -0.2, 0.7, 2.0, 11.0]),
        b in -50.0..50.0f64,
    ) {
        let set = StatSet::new(vec![Statistic::Mean, Statistic::StdDev, Statistic::Skewness]).unwrap();
        let base = descriptive_stats(&x, &set).unwrap().values;
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let moved = descriptive_stats(&y, &set).unwrap().values;
        let tol = 1e-8 * (1.0 + base[0].abs() * a.abs() + b.abs());
        prop_assert!((moved[0] - (a * base[0] + b)).abs() < tol);
        prop_assert!((moved[1] - a.abs() * base[1]).abs() < 1e-8 * (1.0 + moved[1]));
        if base[1] > 1e-6 {
            prop_assert!((moved[2] - a.signum() * base[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn regression_outputs_become_item_scores(raw in prop::collection::vec(-100.0..100.0f64, 0..40)) {
        for (item, v) in regression_items(&raw).iter().zip(&raw) {
            prop_assert!(*item <= 3);
            prop_assert_eq!(f64::from(*item), v.round().clamp(0.0, 3.0));
        }
    }

    #[test]
    fn folds_cover_every_row(y in prop::collection::vec(0u8..4, 5..120), seed in any::<u64>()) {
        let (folds, stratified) = stratified_folds(&y, 5, seed).unwrap();
        prop_assert_eq!(folds.len(), y.len());
        prop_assert!(folds.iter().all(|&f| f < 5));
        if stratified {
            for class in 0u8..4 {
                let mut per_fold = [0usize; 5];
                for (f, _) in folds.iter().zip(&y).filter(|(_, &c)| c == class) {
                    per_fold[*f] += 1;
                }
                let lo = per_fold.iter().min().unwrap();
                let hi = per_fold.iter().max().unwrap();
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}
