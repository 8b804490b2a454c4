//! Thresholding, F-scores, cross-validation and set-up selection.

pub mod baseline;
pub mod folds;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod select;

pub use baseline::{bandpower_baseline, BaselineResult};
pub use folds::{make_folds, Fold};
pub use metrics::{
    calibrate_threshold, classify, fscore, roc_auc, Counts, Prediction, ThresholdRule,
};
pub use pipeline::{fit_detector, run_fold, sweep, EvalConfig, PipelineConfig};
pub use report::{render_svg, BarSeries, EvalReport, FoldResult, SetupSummary};
pub use select::{select_optimal, Candidate, ComfortRanking, Selection};
