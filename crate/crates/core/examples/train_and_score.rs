//! Trains a one-class detector on part of a synthetic corpus and scores
//! the held-out recordings.
//!
//! ```sh
//! cargo run --release --example train_and_score -- [setup] [corpus_seed]
//! ```

use eeg_setup::eval::pipeline::recording_windows;
use eeg_setup::eval::{fit_detector, roc_auc, Counts, PipelineConfig};
use eeg_setup::synthgen::generate_corpus;
use eeg_setup::{builtin_setup, Label, Recording, SynthConfig};

fn main() -> eeg_setup::Result<()> {
    let mut args = std::env::args().skip(1);
    let setup = builtin_setup(&args.next().unwrap_or_else(|| "CzOz".into()))?;
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);

    let corpus = generate_corpus(&SynthConfig { seed, ..Default::default() }, 9)?;
    let (train, test): (Vec<&Recording>, Vec<&Recording>) = (corpus[..7].iter().collect(), corpus[7..].iter().collect());

    let (model, _) = fit_detector(&train, &setup, Label::Alpha, &PipelineConfig::default())?;
    let det = model.detector.as_ref().expect("calibrated");
    println!(
        "{}: {} training windows, final AE1 mse {:.4}, threshold {:.4}",
        setup.name, model.train_meta.n_train_windows, model.train_meta.final_losses.ae1_mse, det.threshold
    );

    let windows = recording_windows(&test, &setup, &det.features)?;
    let scores = model.score_windows(&windows)?;
    let is_alpha: Vec<bool> = windows.iter().map(|w| w.label == Label::Alpha).collect();
    let is_other: Vec<bool> = is_alpha.iter().map(|a| !a).collect();
    let counts = Counts::tally(&scores, &is_alpha, det.threshold);
    println!("held-out windows: {} ({} alpha)", windows.len(), counts.tp + counts.fn_);
    println!("F-score at threshold: {:.4}", counts.fscore()?);
    println!("ROC-AUC of the score as a non-alpha detector: {:.4}", roc_auc(&scores, &is_other)?);
    Ok(())
}
