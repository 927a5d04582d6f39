//! Decision-level fusion of per-modality totals and RMSE / MAE evaluation.

mod eval;
mod fuse;
mod predictions;

pub use eval::{evaluate, weight_search, EvalReport, WeightRow, WeightSearch};
pub use fuse::{fuse, FusionSpec, FusionStrategy, WEIGHT_SUM_TOL};
pub use predictions::{check_same_sessions, PredictionSet, SCORE_MAX};

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn set(name: &str, v: &[f64]) -> PredictionSet {
        PredictionSet::new(
            name,
            v.iter().enumerate().map(|(i, &x)| (format!("S{i}"), x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn weighted_mean_and_max() {
        let a = set("audio", &[10.0]);
        let b = set("text", &[14.0]);
        let half: FusionSpec = "weighted:audio=0.5,text=0.5".parse().unwrap();
        assert_eq!(fuse(&[a.clone(), b.clone()], &half).unwrap().scores["S0"], 12.0);
        assert_eq!(fuse(&[a, b], &FusionSpec::max()).unwrap().scores["S0"], 14.0);
    }

    #[test]
    fn spec_validation() {
        assert!("weighted:a=0.5,b=0.6".parse::<FusionSpec>().is_err());
        assert!("weighted:a=-0.5,b=1.5".parse::<FusionSpec>().is_err());
        assert!("median".parse::<FusionSpec>().is_err());
        let s: FusionSpec = "weighted:a=0.25,b=0.75".parse().unwrap();
        assert_eq!(s.to_string().parse::<FusionSpec>().unwrap(), s);
    }

    #[test]
    fn weights_must_name_every_modality() {
        let spec = FusionSpec::weighted(BTreeMap::from([("audio".to_string(), 1.0)])).unwrap();
        assert!(fuse(&[set("audio", &[1.0]), set("text", &[2.0])], &spec).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let s = set("audio", &[1.5, 0.0, 24.0]);
        s.write(&p, "# format_version=1 seed=0\n").unwrap();
        assert_eq!(PredictionSet::read(&p, "audio").unwrap(), s);
    }
}
