//! Fold pipeline, sweep and band-power baseline on synthetic corpora.

use eeg_setup::eval::{bandpower_baseline, make_folds, run_fold, sweep, ComfortRanking};
use eeg_setup::synthgen::{generate_corpus, DEFAULT_N_RECORDINGS};
use eeg_setup::{builtin_setup, Label, PipelineConfig, Recording, SynthConfig};

fn corpus(cfg: SynthConfig) -> Vec<Recording> {
    generate_corpus(&cfg, DEFAULT_N_RECORDINGS).unwrap()
}

fn prevalence_f(tp: u64, fp: u64, fn_: u64, tn: u64) -> f64 {
    // F-score of labelling every window positive
    let p = (tp + fn_) as f64 / (tp + fp + fn_ + tn) as f64;
    2.0 * p / (1.0 + p)
}

#[test]
fn czoz_sweep_on_default_corpus() {
    let corpus = corpus(SynthConfig::default());
    let czoz = [builtin_setup("CzOz").unwrap()];
    let report = sweep(&corpus, &czoz, Label::Alpha, &PipelineConfig::default(), &ComfortRanking::default()).unwrap();
    let s = &report.per_setup["CzOz"];
    eprintln!("CzOz mean F {:.4} ± {:.4}", s.mean_fscore, s.std_fscore);
    assert_eq!(s.folds.len(), 6);
    assert!(s.skipped_folds.is_empty());
    assert!(s.mean_fscore >= 0.65, "{}", s.mean_fscore);
    assert_eq!(report.selected_setup, "CzOz");
}

#[test]
fn nonalpha_fold_swaps_roles() {
    let corpus = corpus(SynthConfig { seed: 5, ..Default::default() });
    let setup = builtin_setup("refT7").unwrap();
    let (train, test): (Vec<&Recording>, Vec<&Recording>) = (corpus[..7].iter().collect(), corpus[7..].iter().collect());
    let cfg = PipelineConfig::default();
    let a = run_fold(0, &train, &test, &setup, Label::Alpha, &cfg).unwrap();
    let n = run_fold(0, &train, &test, &setup, Label::NonAlpha, &cfg).unwrap();
    assert_eq!(n.positive_class, Label::NonAlpha);
    // same test windows, positives and negatives trade places
    assert_eq!(a.tp + a.fn_, n.fp + n.tn);
    assert_eq!(a.fp + a.tn, n.tp + n.fn_);
    assert!((0.0..=1.0).contains(&n.fscore.unwrap()));
    assert!(run_fold(0, &train, &[], &setup, Label::Alpha, &cfg).is_err());
}

#[test]
fn baseline_is_near_oracle_on_czoz() {
    let corpus = corpus(SynthConfig::default());
    let folds = make_folds(corpus.len(), 6, 0).unwrap();
    let setup = builtin_setup("CzOz").unwrap();
    let b = bandpower_baseline(&corpus, &setup, &folds, Label::Alpha, &Default::default()).unwrap();
    eprintln!("band-power CzOz F {:.4} ± {:.4}", b.mean_fscore, b.std_fscore);
    assert!(b.mean_fscore >= 0.9, "{}", b.mean_fscore);
}

#[test]
fn no_alpha_means_prevalence_level_scores() {
    let corpus = corpus(SynthConfig { alpha_amp_uv: 0.0, ..Default::default() });
    let folds = make_folds(corpus.len(), 6, 0).unwrap();
    let setup = builtin_setup("CzOz").unwrap();
    let b = bandpower_baseline(&corpus, &setup, &folds, Label::Alpha, &Default::default()).unwrap();
    let gaps: Vec<f64> = b
        .folds
        .iter()
        .map(|f| f.fscore.unwrap() - prevalence_f(f.tp, f.fp, f.fn_, f.tn))
        .collect();
    eprintln!("F minus prevalence F per fold: {gaps:?}");
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    assert!(mean_gap.abs() < 0.1, "{mean_gap}");
}
