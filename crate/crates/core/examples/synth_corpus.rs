//! Generates a synthetic corpus, writes it as CSV and summarises each
//! recording's labels and 8–12 Hz power on every electrode.
//!
//! ```sh
//! cargo run --release --example synth_corpus -- [out_dir] [seed]
//! ```

use std::path::PathBuf;

use eeg_setup::dataset::{load_recording, save_recording};
use eeg_setup::features::spectrum::{band_power, periodogram};
use eeg_setup::synthgen::{generate_corpus, DEFAULT_N_RECORDINGS};
use eeg_setup::{Label, SynthConfig};

fn main() -> eeg_setup::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "corpus".into()));
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(0);
    std::fs::create_dir_all(&dir).map_err(|e| eeg_setup::Error::io(&dir, e))?;

    let cfg = SynthConfig { seed, ..Default::default() };
    for rec in generate_corpus(&cfg, DEFAULT_N_RECORDINGS)? {
        let path = dir.join(format!("{}.csv", rec.id));
        save_recording(&rec, &path)?;
        assert_eq!(load_recording(&path)?, rec);

        let alpha = rec.labels.iter().filter(|l| **l == Label::Alpha).count();
        let fs = rec.sample_rate_hz;
        let powers: Vec<String> = rec
            .electrodes
            .iter()
            .zip(&rec.samples)
            .map(|(e, x)| {
                let n = x.len().min(1 << 14);
                format!("{e} {:.1}", band_power(&periodogram(&x[..n], fs), fs, n, 8.0, 12.0))
            })
            .collect();
        println!(
            "{} {:.0} s, {:.0}% alpha | 8-12 Hz power: {}",
            path.display(),
            rec.duration_s(),
            100.0 * alpha as f64 / rec.labels.len() as f64,
            powers.join(", ")
        );
    }
    Ok(())
}
