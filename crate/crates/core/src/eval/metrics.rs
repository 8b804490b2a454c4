//! F-score, thresholds and ROC-AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2·tp / (2·tp + fn + fp)`; undefined when all three counts are zero.
pub fn fscore(tp: u64, fp: u64, fn_: u64) -> Result<f64> {
    let denom = 2 * tp + fn_ + fp;
    if denom == 0 {
        return Err(Error::UndefinedFScore);
    }
    Ok(2.0 * tp as f64 / denom as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Positive,
    Negative,
}

/// Low scores look like the training class: positive iff `score ≤ threshold`.
pub fn classify(score: f64, threshold: f64) -> Prediction {
    if score <= threshold {
        Prediction::Positive
    } else {
        Prediction::Negative
    }
}

/// How a decision threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `p`-th percentile of held-out positive-class scores.
    TrainPercentile { p: f64 },
    /// Best F-score on the labelled test scores. Diagnostic upper bound only.
    OracleBestF,
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::TrainPercentile { p: 95.0 }
    }
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdRule::TrainPercentile { p } if !(p > 0.0 && p < 100.0) => Err(Error::invariant(
                format!("percentile must lie in (0, 100), got {p}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self, ThresholdRule::OracleBestF)
    }
}

/// Linear-interpolation percentile (rank `p/100·(n−1)` in sorted order).
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let rank = (p / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(if lo == hi { v[lo] } else { v[lo] + frac * (v[hi] - v[lo]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Counts {
    /// Tallies predictions against ground truth (`true` = positive class).
    pub fn tally(scores: &[f64], truth: &[bool], threshold: f64) -> Counts {
        let mut c = Counts::default();
        for (&s, &pos) in scores.iter().zip(truth) {
            match (classify(s, threshold), pos) {
                (Prediction::Positive, true) => c.tp += 1,
                (Prediction::Positive, false) => c.fp += 1,
                (Prediction::Negative, true) => c.fn_ += 1,
                (Prediction::Negative, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn fscore(&self) -> Result<f64> {
        fscore(self.tp, self.fp, self.fn_)
    }
}

/// Threshold maximising the F-score of `score ≤ t` against `truth`.
///
/// Candidates are one value below every score, each midpoint between
/// consecutive distinct scores, and the maximum score. Returns the first
/// (lowest) maximiser together with its F-score.
pub fn best_f_threshold(scores: &[f64], truth: &[bool]) -> Result<(f64, f64)> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let total_pos = truth.iter().filter(|&&t| t).count() as u64;

    let f_of = |tp: u64, fp: u64| -> f64 {
        fscore(tp, fp, total_pos - tp).unwrap_or(0.0)
    };
    let lowest = scores[idx[0]];
    let mut best_t = lowest - 1.0_f64.max(lowest.abs());
    let mut best_f = f_of(0, 0);
    let (mut tp, mut fp) = (0u64, 0u64);
    for (rank, &i) in idx.iter().enumerate() {
        if truth[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let next = idx.get(rank + 1).map(|&j| scores[j]);
        if next == Some(scores[i]) {
            continue;
        }
        let t = match next {
            Some(n) => 0.5 * (scores[i] + n),
            None => scores[i],
        };
        let f = f_of(tp, fp);
        if f > best_f {
            best_f = f;
            best_t = t;
        }
    }
    Ok((best_t, best_f))
}

/// Chooses a decision threshold. `test_truth` is required only by the
/// oracle rule, in which case `scores` are the labelled test scores.
pub fn calibrate_threshold(scores: &[f64], rule: &ThresholdRule, test_truth: Option<&[bool]>) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    rule.validate()?;
    match *rule {
        ThresholdRule::TrainPercentile { p } => percentile(scores, p),
        ThresholdRule::OracleBestF => {
            let truth = test_truth
                .ok_or_else(|| Error::invariant("oracle threshold needs test labels"))?;
            if truth.len() != scores.len() {
                return Err(Error::DimensionMismatch { expected: scores.len(), got: truth.len() });
            }
            best_f_threshold(scores, truth).map(|(t, _)| t)
        }
    }
}

/// Area under the ROC curve for "higher score ⇒ positive", ties counted
/// half (Mann-Whitney U / (n_pos · n_neg)).
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invariant("ROC-AUC needs both classes"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += idx[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}
