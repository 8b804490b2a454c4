//! Extracts per-window features for one set-up and prints how well each
//! feature alone separates alpha from non-alpha windows.
//!
//! ```sh
//! cargo run --release --example feature_separability -- [setup] [corpus_seed]
//! ```

use eeg_setup::eval::roc_auc;
use eeg_setup::features::{build_feature_series, Feature};
use eeg_setup::synthgen::generate_corpus;
use eeg_setup::{builtin_setup, FeatureConfig, Label, SynthConfig};

fn main() -> eeg_setup::Result<()> {
    let mut args = std::env::args().skip(1);
    let setup = builtin_setup(&args.next().unwrap_or_else(|| "CzOz".into()))?;
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);

    let corpus = generate_corpus(&SynthConfig { seed, ..Default::default() }, 9)?;
    let cfg = FeatureConfig::default();
    let series = corpus
        .iter()
        .map(|r| build_feature_series(r, &setup, &cfg))
        .collect::<eeg_setup::Result<Vec<_>>>()?;

    let is_alpha: Vec<bool> = series.iter().flat_map(|s| s.labels.iter().map(|l| *l == Label::Alpha)).collect();
    let n_alpha = is_alpha.iter().filter(|a| **a).count();
    println!("{}: {} feature windows, {} alpha", setup.name, is_alpha.len(), n_alpha);
    println!("{:<10} {:<10} {:>8}", "channel", "feature", "AUC");
    for (c, channel) in setup.channels.iter().enumerate() {
        for (j, feature) in Feature::ORDER.iter().enumerate() {
            let col = c * Feature::ORDER.len() + j;
            let values: Vec<f64> = series.iter().flat_map(|s| s.features.column(col).to_vec()).collect();
            // orientation-free: 0.5 is chance either way
            let auc = roc_auc(&values, &is_alpha)?;
            println!("{:<10} {:<10} {:>8.4}", channel.to_string(), feature.as_str(), auc.max(1.0 - auc));
        }
    }
    Ok(())
}
