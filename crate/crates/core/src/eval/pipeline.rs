//! Per-fold training and testing, and the full set-up sweep.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{make_folds, Fold};
use super::metrics::{best_f_threshold, calibrate_threshold, Counts, ThresholdRule};
use super::report::{EvalReport, FoldResult};
use super::select::ComfortRanking;
use crate::dataset::{Label, Recording, SetUp, REFERENCE_SETUP};
use crate::error::{Error, Result};
use crate::features::{assemble_model_windows, build_feature_series, FeatureConfig, ModelWindow};
use crate::model::{train, DetectorMeta, NetSpec, TrainConfig, UsadModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_folds: usize,
    pub threshold: ThresholdRule,
    pub delta: f64,
    pub positive_class: Label,
    /// Share of positive training windows held out for threshold calibration.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_folds: 6,
            threshold: ThresholdRule::default(),
            delta: 0.17,
            positive_class: Label::Alpha,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_folds == 0 {
            return Err(Error::invariant("k_folds must be positive"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invariant("validation_fraction must lie in (0, 1)"));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::invariant("delta must be non-negative"));
        }
        self.threshold.validate()
    }
}

/// Everything a fold needs besides the data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

/// Model windows of every recording; windows never straddle recordings.
pub fn recording_windows(recs: &[&Recording], setup: &SetUp, cfg: &FeatureConfig) -> Result<Vec<ModelWindow>> {
    let mut out = Vec::new();
    for rec in recs {
        let fs = build_feature_series(rec, setup, cfg)?;
        out.extend(assemble_model_windows(&fs, cfg.model_window_k)?);
    }
    Ok(out)
}

/// Trains a detector on the positive-class windows of `train_recs` and
/// calibrates its threshold on a held-out share of them.
///
/// With [`ThresholdRule::OracleBestF`] the stored threshold is the
/// percentile-95 fallback; the oracle threshold is only ever computed
/// against test labels in [`run_fold`].
pub fn fit_detector(
    train_recs: &[&Recording],
    setup: &SetUp,
    positive: Label,
    cfg: &PipelineConfig,
) -> Result<(UsadModel, Vec<f64>)> {
    cfg.eval.validate()?;
    let mut positives: Vec<ModelWindow> = recording_windows(train_recs, setup, &cfg.features)?
        .into_iter()
        .filter(|w| w.label == positive)
        .collect();
    if positives.len() < 2 {
        return Err(Error::EmptyTrainingSet);
    }
    positives.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.eval.seed));
    let n_val = ((positives.len() as f64 * cfg.eval.validation_fraction).round() as usize)
        .clamp(1, positives.len() - 1);
    let val = positives.split_off(positives.len() - n_val);

    let spec = NetSpec::for_setup(setup.m(), cfg.features.model_window_k)?;
    let mut model = train(&positives, &spec, &cfg.train)?;
    let val_scores = model.score_windows(&val)?;
    let rule = match cfg.eval.threshold {
        ThresholdRule::OracleBestF => ThresholdRule::default(),
        r => r,
    };
    let threshold = calibrate_threshold(&val_scores, &rule, None)?;
    model.detector = Some(DetectorMeta {
        setup: setup.clone(),
        features: cfg.features.clone(),
        positive_class: positive,
        threshold,
        threshold_rule: rule,
    });
    Ok((model, val_scores))
}

/// Trains on `train_recs`, tests on `test_recs`.
pub fn run_fold(
    fold_id: usize,
    train_recs: &[&Recording],
    test_recs: &[&Recording],
    setup: &SetUp,
    positive: Label,
    cfg: &PipelineConfig,
) -> Result<FoldResult> {
    if test_recs.is_empty() {
        return Err(Error::invariant("fold has no test recordings"));
    }
    let (model, _) = fit_detector(train_recs, setup, positive, cfg)?;
    let test = recording_windows(test_recs, setup, &cfg.features)?;
    let scores = model.score_windows(&test)?;
    let truth: Vec<bool> = test.iter().map(|w| w.label == positive).collect();

    let oracle = best_f_threshold(&scores, &truth)?;
    let threshold = if cfg.eval.threshold.is_oracle() {
        oracle.0
    } else {
        model.detector.as_ref().expect("fit_detector sets detector").threshold
    };
    let counts = Counts::tally(&scores, &truth, threshold);
    let skipped = !truth.contains(&true);
    Ok(FoldResult {
        fold_id,
        setup_name: setup.name.clone(),
        positive_class: positive,
        threshold,
        tp: counts.tp,
        fp: counts.fp,
        fn_: counts.fn_,
        tn: counts.tn,
        fscore: if skipped { None } else { counts.fscore().ok() },
        oracle_fscore: if skipped { None } else { Some(oracle.1) },
        skipped,
    })
}

/// Inserts the reference set-up at the front if it is missing.
pub fn with_reference(setups: &[SetUp]) -> Result<Vec<SetUp>> {
    let mut out = setups.to_vec();
    if !out.iter().any(|s| s.name == REFERENCE_SETUP) {
        out.insert(0, crate::dataset::builtin_setup(REFERENCE_SETUP)?);
    }
    Ok(out)
}

/// Cross-validates every set-up on the same recording-level folds.
pub fn sweep(
    corpus: &[Recording],
    setups: &[SetUp],
    positive: Label,
    cfg: &PipelineConfig,
    comfort: &ComfortRanking,
) -> Result<EvalReport> {
    if setups.is_empty() {
        return Err(Error::invariant("sweep needs at least one set-up"));
    }
    cfg.eval.validate()?;
    let setups = with_reference(setups)?;
    let folds = make_folds(corpus.len(), cfg.eval.k_folds, cfg.eval.seed)?;

    let units: Vec<(&SetUp, &Fold)> = setups
        .iter()
        .flat_map(|s| folds.iter().map(move |f| (s, f)))
        .collect();
    let results = units
        .par_iter()
        .map(|(setup, fold)| {
            let train: Vec<&Recording> = fold.train.iter().map(|&i| &corpus[i]).collect();
            let test: Vec<&Recording> = fold.test.iter().map(|&i| &corpus[i]).collect();
            run_fold(fold.id, &train, &test, setup, positive, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    EvalReport::build(&setups, results, positive, cfg, comfort, folds)
}
