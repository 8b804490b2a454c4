//! Runs the 8–12 Hz band-power threshold baseline on every built-in set-up
//! with the same recording-level folds the autoencoder sweep uses.
//!
//! ```sh
//! cargo run --release --example bandpower_baseline -- [corpus_seed] [alpha|nonalpha]
//! ```

use eeg_setup::eval::{bandpower_baseline, make_folds};
use eeg_setup::synthgen::{generate_corpus, DEFAULT_N_RECORDINGS};
use eeg_setup::{builtin_setups, EvalConfig, FeatureConfig, Label, SynthConfig};

fn main() -> eeg_setup::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);
    let positive: Label = args.next().map(|s| s.parse().expect("class")).unwrap_or(Label::Alpha);

    let corpus = generate_corpus(&SynthConfig { seed, ..Default::default() }, DEFAULT_N_RECORDINGS)?;
    let eval = EvalConfig::default();
    let folds = make_folds(corpus.len(), eval.k_folds, eval.seed)?;
    println!("{:<10} {:>8} {:>8}", "setup", "mean F", "std F");
    for setup in builtin_setups() {
        let r = bandpower_baseline(&corpus, &setup, &folds, positive, &FeatureConfig::default())?;
        println!("{:<10} {:>8.4} {:>8.4}", setup.name, r.mean_fscore, r.std_fscore);
    }
    Ok(())
}
