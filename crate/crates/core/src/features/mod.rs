//! Per-window feature extraction and model-window assembly.
//!
//! Raw channel signals are cut into overlapping feature windows; each window
//! becomes eight numbers (six time-domain statistics and two spectral ones).
//! `K` consecutive feature rows are then flattened into one [`ModelWindow`],
//! the autoencoder's input.

pub mod spectrum;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{derive_channel_signal, Label, Recording, SetUp};
use crate::error::{Error, Result};

/// Features per channel.
pub const N_FEATURES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Mean,
    Std,
    Median,
    Min,
    Max,
    Rms,
    MaxPsd,
    MeanPsd,
}

impl Feature {
    pub const ORDER: [Feature; N_FEATURES] = [
        Feature::Mean,
        Feature::Std,
        Feature::Median,
        Feature::Min,
        Feature::Max,
        Feature::Rms,
        Feature::MaxPsd,
        Feature::MeanPsd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Mean => "mean",
            Feature::Std => "std",
            Feature::Median => "median",
            Feature::Min => "min",
            Feature::Max => "max",
            Feature::Rms => "rms",
            Feature::MaxPsd => "max_psd",
            Feature::MeanPsd => "mean_psd",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsdWindow {
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelRule {
    #[default]
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub window_len_samples: usize,
    pub window_stride_samples: usize,
    pub psd_window: PsdWindow,
    pub label_rule: LabelRule,
    /// Feature rows per model window (`K`).
    pub model_window_k: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_len_samples: 256,
            window_stride_samples: 128,
            psd_window: PsdWindow::Hann,
            label_rule: LabelRule::Majority,
            model_window_k: 4,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let FeatureConfig {
            window_len_samples: len,
            window_stride_samples: stride,
            model_window_k: k,
            ..
        } = *self;
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invariant(format!(
                "feature window length {len} must be a power of two"
            )));
        }
        if stride == 0 || stride > len {
            return Err(Error::invariant(format!(
                "stride {stride} must be in 1..={len}"
            )));
        }
        if k == 0 {
            return Err(Error::invariant("model window K must be positive"));
        }
        Ok(())
    }
}

/// Number of windows of `window` samples at `stride` that fit in `len`.
pub fn window_count(len: usize, window: usize, stride: usize) -> usize {
    if len < window {
        0
    } else {
        (len - window) / stride + 1
    }
}

/// The eight features of a single window, in [`Feature::ORDER`].
pub fn window_features(x: &[f64], fs: f64) -> [f64; N_FEATURES] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let ms = x.iter().map(|v| v * v).sum::<f64>() / n;

    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };

    let psd = spectrum::periodogram(x, fs);
    let ac = &psd[1..];
    let (max_psd, mean_psd) = if ac.is_empty() {
        (0.0, 0.0)
    } else {
        (
            ac.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ac.iter().sum::<f64>() / ac.len() as f64,
        )
    };

    [
        mean,
        var.sqrt(),
        median,
        sorted[0],
        sorted[sorted.len() - 1],
        ms.sqrt(),
        max_psd,
        mean_psd,
    ]
}

/// Slides a feature window over `signal`; one row of eight features per window.
pub fn extract_features(signal: &[f64], fs: f64, cfg: &FeatureConfig) -> Result<Vec<[f64; N_FEATURES]>> {
    cfg.validate()?;
    let len = cfg.window_len_samples;
    if signal.len() < len {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            needed: len,
        });
    }
    let n = window_count(signal.len(), len, cfg.window_stride_samples);
    Ok((0..n)
        .map(|k| {
            let start = k * cfg.window_stride_samples;
            window_features(&signal[start..start + len], fs)
        })
        .collect())
}

/// Alpha iff strictly more than half of `labels[start..start+len]` are Alpha.
pub fn window_label(labels: &[Label], start: usize, len: usize) -> Result<Label> {
    let end = start.checked_add(len).filter(|&e| e <= labels.len()).ok_or(
        Error::OutOfRange {
            start,
            end: start.saturating_add(len),
            len: labels.len(),
        },
    )?;
    let alpha = labels[start..end].iter().filter(|&&l| l == Label::Alpha).count();
    Ok(if 2 * alpha > len {
        Label::Alpha
    } else {
        Label::NonAlpha
    })
}

/// Per-window features of every channel of a set-up, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub setup: SetUp,
    pub features: Array2<f64>,
    pub labels: Vec<Label>,
}

impl FeatureSeries {
    pub fn n_windows(&self) -> usize {
        self.labels.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.setup
            .channels
            .iter()
            .flat_map(|c| Feature::ORDER.iter().map(move |f| format!("{}_{}", c.name(), f)))
            .collect()
    }

    /// Writes the feature cache CSV: one row per window plus its label.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&self.column_names().join(","));
        out.push_str(",label\n");
        for (row, label) in self.features.rows().into_iter().zip(&self.labels) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(label.as_str());
            out.push('\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Derives each bipolar channel of `setup` and extracts its features.
pub fn build_feature_series(rec: &Recording, setup: &SetUp, cfg: &FeatureConfig) -> Result<FeatureSeries> {
    cfg.validate()?;
    let per_channel = setup
        .channels
        .iter()
        .map(|&ch| {
            let sig = derive_channel_signal(rec, ch)?;
            extract_features(&sig, rec.sample_rate_hz, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let n_windows = per_channel[0].len();
    let m = setup.m();
    let mut features = Array2::zeros((n_windows, m * N_FEATURES));
    for (c, rows) in per_channel.iter().enumerate() {
        for (w, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                features[[w, c * N_FEATURES + j]] = v;
            }
        }
    }
    let labels = (0..n_windows)
        .map(|w| window_label(&rec.labels, w * cfg.window_stride_samples, cfg.window_len_samples))
        .collect::<Result<Vec<_>>>()?;

    Ok(FeatureSeries {
        setup: setup.clone(),
        features,
        labels,
    })
}

/// `K` consecutive feature rows flattened oldest-first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWindow {
    pub flat: Vec<f64>,
    pub label: Label,
}

/// Slides a `k`-row window over the feature rows with stride one.
/// Each model window is labelled by its newest row.
pub fn assemble_model_windows(fs: &FeatureSeries, k: usize) -> Result<Vec<ModelWindow>> {
    let n = fs.n_windows();
    if k == 0 || n < k {
        return Err(Error::TooFewWindows { have: n, needed: k.max(1) });
    }
    Ok((0..=n - k)
        .map(|start| {
            let flat = fs
                .features
                .slice(ndarray::s![start..start + k, ..])
                .iter()
                .copied()
                .collect();
            ModelWindow {
                flat,
                label: fs.labels[start + k - 1],
            }
        })
        .collect())
}

/// Floor applied to per-dimension standard deviations and ranges.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    #[default]
    ZScore,
    MinMax,
}

/// Per-dimension affine scaling `(x − offset) / scale` fitted on training
/// windows: mean and standard deviation for z-scores, minimum and range
/// for min-max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    #[serde(default)]
    pub kind: Scaling,
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

fn check_dims(train: &[ModelWindow]) -> Result<usize> {
    let first = train.first().ok_or(Error::EmptyTrainingSet)?;
    let d = first.flat.len();
    match train.iter().find(|w| w.flat.len() != d) {
        Some(w) => Err(Error::DimensionMismatch { expected: d, got: w.flat.len() }),
        None => Ok(d),
    }
}

impl Normalizer {
    /// Z-score statistics.
    pub fn fit(train: &[ModelWindow]) -> Result<Self> {
        let d = check_dims(train)?;
        let n = train.len() as f64;
        let mut mean = vec![0.0; d];
        for w in train {
            for (m, v) in mean.iter_mut().zip(&w.flat) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for w in train {
            for ((s, v), m) in var.iter_mut().zip(&w.flat).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var.into_iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Normalizer { kind: Scaling::ZScore, offset: mean, scale: std })
    }

    /// Maps the training range of every dimension onto `[0, 1]`. Constant
    /// dimensions map to 1/2.
    pub fn fit_min_max(train: &[ModelWindow]) -> Result<Self> {
        let d = check_dims(train)?;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for w in train {
            for ((l, h), v) in lo.iter_mut().zip(hi.iter_mut()).zip(&w.flat) {
                *l = l.min(*v);
                *h = h.max(*v);
            }
        }
        let (offset, scale) = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| if h - l < STD_FLOOR { (l - 0.5, 1.0) } else { (l, h - l) })
            .unzip();
        Ok(Normalizer { kind: Scaling::MinMax, offset, scale })
    }

    pub fn identity(dim: usize) -> Self {
        Normalizer { kind: Scaling::ZScore, offset: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(x.iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn apply(&self, w: &ModelWindow) -> Result<ModelWindow> {
        Ok(ModelWindow {
            flat: self.apply_slice(&w.flat)?,
            label: w.label,
        })
    }

    pub fn invert(&self, w: &ModelWindow) -> Result<ModelWindow> {
        if w.flat.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: w.flat.len() });
        }
        Ok(ModelWindow {
            flat: w
                .flat
                .iter()
                .zip(self.offset.iter().zip(&self.scale))
                .map(|(z, (m, s))| z * s + m)
                .collect(),
            label: w.label,
        })
    }
}
