//! Spectral properties of the synthetic generator, measured with the
//! features module's periodogram.

use eeg_setup::dataset::derive_channel_signal;
use eeg_setup::features::spectrum::{band_power, periodogram};
use eeg_setup::synthgen::generate;
use eeg_setup::{builtin_setup, ElectrodeName, Label, Recording, SynthConfig};

const WIN: usize = 256;

/// Mean 8–12 Hz band power over windows lying entirely inside one label.
fn alpha_band_power(signal: &[f64], rec: &Recording, label: Label) -> (f64, usize) {
    let fs = rec.sample_rate_hz;
    let mut sum = 0.0;
    let mut n = 0;
    for start in (0..signal.len().saturating_sub(WIN - 1)).step_by(WIN) {
        if rec.labels[start..start + WIN].iter().all(|l| *l == label) {
            sum += band_power(&periodogram(&signal[start..start + WIN], fs), fs, WIN, 8.0, 12.0);
            n += 1;
        }
    }
    (sum / n.max(1) as f64, n)
}

fn czoz(rec: &Recording) -> Vec<f64> {
    derive_channel_signal(rec, builtin_setup("CzOz").unwrap().channels[0]).unwrap()
}

#[test]
fn czoz_alpha_band_power_dominates_during_bursts() {
    for seed in 0..3 {
        let rec = generate(&SynthConfig { seed, ..Default::default() }).unwrap();
        let x = czoz(&rec);
        let (on, n_on) = alpha_band_power(&x, &rec, Label::Alpha);
        let (off, n_off) = alpha_band_power(&x, &rec, Label::NonAlpha);
        assert!(n_on > 10 && n_off > 10);
        assert!(on > 3.0 * off, "seed {seed}: {on} vs {off}");
    }
}

#[test]
fn alpha_band_power_follows_spatial_gain() {
    use ElectrodeName::*;
    let order = [Oz, Cz, T7, Fp1];
    let mut totals = [0.0; 4];
    let mut seconds = 0.0;
    for seed in 0..5 {
        let rec = generate(&SynthConfig { seed, ..Default::default() }).unwrap();
        for (i, (t, e)) in totals.iter_mut().zip(order).enumerate() {
            let (p, n) = alpha_band_power(rec.electrode(e).unwrap(), &rec, Label::Alpha);
            *t += p / 5.0;
            if i == 0 {
                seconds += n as f64 * WIN as f64 / rec.sample_rate_hz;
            }
        }
    }
    assert!(seconds >= 60.0, "only {seconds} s of alpha");
    for pair in totals.windows(2) {
        assert!(pair[0] >= pair[1], "{totals:?}");
    }
}

#[test]
fn zero_alpha_amplitude_makes_classes_indistinguishable() {
    let cfg = SynthConfig { alpha_amp_uv: 0.0, duration_s: 900.0, seed: 3, ..Default::default() };
    let rec = generate(&cfg).unwrap();
    let x = czoz(&rec);
    let (on, _) = alpha_band_power(&x, &rec, Label::Alpha);
    let (off, _) = alpha_band_power(&x, &rec, Label::NonAlpha);
    assert!((on / off - 1.0).abs() < 0.15, "{on} vs {off}");
}
