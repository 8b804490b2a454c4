//! Band-power threshold baseline.
//!
//! Each window is reduced to the mean 8–12 Hz periodogram power across the
//! set-up's channels; a single threshold, fitted on the training folds for
//! best F-score, separates the classes. Windows are aligned with the
//! autoencoder's model windows so both see the same test set.

use serde::{Deserialize, Serialize};

use super::folds::Fold;
use super::metrics::{best_f_threshold, Counts};
use super::report::{mean_std, FoldResult};
use crate::dataset::{derive_channel_signal, Label, Recording, SetUp};
use crate::error::{Error, Result};
use crate::features::spectrum::{band_power, periodogram};
use crate::features::{window_count, window_label, FeatureConfig};

pub const ALPHA_BAND_HZ: (f64, f64) = (8.0, 12.0);

/// `(band power, label)` per model-window-aligned feature window.
pub fn band_power_windows(rec: &Recording, setup: &SetUp, cfg: &FeatureConfig) -> Result<Vec<(f64, Label)>> {
    cfg.validate()?;
    let len = cfg.window_len_samples;
    let stride = cfg.window_stride_samples;
    let n = window_count(rec.n_samples(), len, stride);
    if n < cfg.model_window_k {
        return Err(Error::TooFewWindows { have: n, needed: cfg.model_window_k });
    }
    let signals = setup
        .channels
        .iter()
        .map(|&c| derive_channel_signal(rec, c))
        .collect::<Result<Vec<_>>>()?;
    let fs = rec.sample_rate_hz;
    (cfg.model_window_k - 1..n)
        .map(|w| {
            let start = w * stride;
            let bp = signals
                .iter()
                .map(|s| band_power(&periodogram(&s[start..start + len], fs), fs, len, ALPHA_BAND_HZ.0, ALPHA_BAND_HZ.1))
                .sum::<f64>()
                / signals.len() as f64;
            Ok((bp, window_label(&rec.labels, start, len)?))
        })
        .collect()
}

/// Maps band power to a "low means positive" score.
fn oriented(bp: f64, positive: Label) -> f64 {
    match positive {
        Label::Alpha => -bp,
        Label::NonAlpha => bp,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub setup_name: String,
    #[serde(with = "super::report::nan_as_null")]
    pub mean_fscore: f64,
    #[serde(with = "super::report::nan_as_null")]
    pub std_fscore: f64,
    pub folds: Vec<FoldResult>,
}

pub fn bandpower_baseline(
    corpus: &[Recording],
    setup: &SetUp,
    folds: &[Fold],
    positive: Label,
    cfg: &FeatureConfig,
) -> Result<BaselineResult> {
    let per_rec = corpus
        .iter()
        .map(|r| band_power_windows(r, setup, cfg))
        .collect::<Result<Vec<_>>>()?;
    let collect = |ids: &[usize]| -> (Vec<f64>, Vec<bool>) {
        ids.iter()
            .flat_map(|&i| per_rec[i].iter())
            .map(|&(bp, l)| (oriented(bp, positive), l == positive))
            .unzip()
    };

    let mut results = Vec::with_capacity(folds.len());
    for fold in folds {
        let (train_s, train_t) = collect(&fold.train);
        let (threshold, _) = best_f_threshold(&train_s, &train_t)?;
        let (test_s, test_t) = collect(&fold.test);
        let c = Counts::tally(&test_s, &test_t, threshold);
        let skipped = !test_t.contains(&true);
        results.push(FoldResult {
            fold_id: fold.id,
            setup_name: setup.name.clone(),
            positive_class: positive,
            threshold,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            tn: c.tn,
            fscore: if skipped { None } else { c.fscore().ok() },
            oracle_fscore: if skipped { None } else { best_f_threshold(&test_s, &test_t).ok().map(|b| b.1) },
            skipped,
        });
    }
    let scored: Vec<f64> = results.iter().filter_map(|r| r.fscore).collect();
    let (mean_fscore, std_fscore) = mean_std(&scored);
    Ok(BaselineResult {
        setup_name: setup.name.clone(),
        mean_fscore,
        std_fscore,
        folds: results,
    })
}
