//! Seeded synthetic EEG with alternating alpha / non-alpha segments.
//!
//! Signal model per electrode `e`:
//!
//! ```text
//! x_e(t) = [alpha burst] A·g_e·sin(2π f t + φ_burst)
//!        + pink background of RMS B·g_e            (independent per electrode)
//!        + white sensor noise of RMS σ              (independent per electrode)
//!        + blink pulses on Fp1/Fp2                  (non-alpha segments only)
//! ```
//!
//! Every electrode has its mean removed at the end, like an AC-coupled
//! amplifier.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ElectrodeName, Label, Recording};
use crate::error::{Error, Result};
use crate::features::spectrum::fft_in_place;

pub const MIN_SEGMENT_S: f64 = 2.0;
pub const MAX_SEGMENT_S: f64 = 30.0;
pub const BLINK_DURATION_S: f64 = 0.4;
pub const BLINK_AMP_FACTOR: f64 = 5.0;
pub const DEFAULT_N_RECORDINGS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub alpha_freq_hz: f64,
    pub alpha_amp_uv: f64,
    pub background_amp_uv: f64,
    pub sensor_noise_uv: f64,
    pub burst_mean_s: f64,
    /// Zero produces class-pure alpha recordings.
    pub gap_mean_s: f64,
    pub spatial_gain: BTreeMap<ElectrodeName, f64>,
    pub blink_rate_hz: f64,
}

pub fn default_spatial_gain() -> BTreeMap<ElectrodeName, f64> {
    use ElectrodeName::*;
    BTreeMap::from([
        (Oz, 1.0),
        (Cz, 0.6),
        (T7, 0.35),
        (Fp1, 0.2),
        (Fp2, 0.2),
        (Ref, 0.05),
    ])
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            sample_rate_hz: 256.0,
            duration_s: 120.0,
            alpha_freq_hz: 10.0,
            alpha_amp_uv: 20.0,
            background_amp_uv: 10.0,
            sensor_noise_uv: 2.0,
            burst_mean_s: 10.0,
            gap_mean_s: 10.0,
            spatial_gain: default_spatial_gain(),
            blink_rate_hz: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sample_rate_hz", self.sample_rate_hz),
            ("duration_s", self.duration_s),
            ("burst_mean_s", self.burst_mean_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invariant(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("alpha_amp_uv", self.alpha_amp_uv),
            ("background_amp_uv", self.background_amp_uv),
            ("sensor_noise_uv", self.sensor_noise_uv),
            ("gap_mean_s", self.gap_mean_s),
            ("blink_rate_hz", self.blink_rate_hz),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invariant(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(8.0..=12.0).contains(&self.alpha_freq_hz) {
            return Err(Error::invariant(format!(
                "alpha_freq_hz must lie in [8, 12], got {}",
                self.alpha_freq_hz
            )));
        }
        if self.duration_s * self.sample_rate_hz < 1.0 {
            return Err(Error::invariant("recording would contain no samples"));
        }
        for e in ElectrodeName::ALL {
            match self.spatial_gain.get(&e) {
                Some(g) if (0.0..=1.0).contains(g) => {}
                Some(g) => {
                    return Err(Error::invariant(format!("spatial gain of {e} is {g}, outside [0, 1]")))
                }
                None => return Err(Error::invariant(format!("spatial gain of {e} missing"))),
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        ((self.duration_s * self.sample_rate_hz).round() as usize).max(1)
    }

    fn gain(&self, e: ElectrodeName) -> f64 {
        self.spatial_gain[&e]
    }
}

/// Contiguous run of one label, in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: usize,
    len: usize,
    label: Label,
}

fn draw_segments(cfg: &SynthConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let fs = cfg.sample_rate_hz;
    // Keep segments short enough that recordings of >= 2·MIN_SEGMENT_S
    // always contain a label change.
    let max_s = MAX_SEGMENT_S.min(cfg.duration_s / 2.0).max(MIN_SEGMENT_S);
    let mut label = if rng.random_bool(0.5) { Label::Alpha } else { Label::NonAlpha };
    if cfg.gap_mean_s == 0.0 {
        label = Label::Alpha;
    }
    let mut segs = Vec::new();
    let mut start = 0;
    while start < n {
        let mean = match label {
            Label::Alpha => cfg.burst_mean_s,
            Label::NonAlpha => cfg.gap_mean_s,
        };
        let dur_s = Exp::new(1.0 / mean)
            .expect("positive rate")
            .sample(rng)
            .clamp(MIN_SEGMENT_S, max_s);
        let len = ((dur_s * fs).round() as usize).max(1).min(n - start);
        segs.push(Segment { start, len, label });
        start += len;
        if cfg.gap_mean_s > 0.0 {
            label = label.other();
        }
    }
    segs
}

/// Pink (1/f power) noise of exactly `rms` over `n` samples.
fn pink_noise(n: usize, rms: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = n.next_power_of_two().max(2);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut buf: Vec<Complex64> = (0..len).map(|_| Complex64::new(normal.sample(rng), 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf[0] = Complex64::new(0.0, 0.0);
    for (k, v) in buf.iter_mut().enumerate().skip(1) {
        let bin = k.min(len - k) as f64;
        *v /= bin.sqrt();
    }
    fft_in_place(&mut buf, true);
    let mut out: Vec<f64> = buf[..n].iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    let cur = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let scale = if cur > 0.0 { rms / cur } else { 0.0 };
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

fn blink_pulse(i: usize, fs: f64, amp: f64) -> f64 {
    let t = i as f64 / fs;
    0.5 * amp * (1.0 - (2.0 * PI * t / BLINK_DURATION_S).cos())
}

/// Generates one recording; identical configs give bit-identical output.
pub fn generate(cfg: &SynthConfig) -> Result<Recording> {
    cfg.validate()?;
    let fs = cfg.sample_rate_hz;
    let n = cfg.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let segments = draw_segments(cfg, n, &mut rng);
    let mut labels = Vec::with_capacity(n);
    for s in &segments {
        labels.extend(std::iter::repeat_n(s.label, s.len));
    }

    // alpha carrier shared by all electrodes, scaled per electrode below
    let mut carrier = vec![0.0; n];
    for s in segments.iter().filter(|s| s.label == Label::Alpha) {
        let phase = rng.random_range(0.0..2.0 * PI);
        for (i, c) in carrier[s.start..s.start + s.len].iter_mut().enumerate() {
            let t = (s.start + i) as f64 / fs;
            *c = (2.0 * PI * cfg.alpha_freq_hz * t + phase).sin();
        }
    }

    let mut blinks = vec![0.0; n];
    if cfg.blink_rate_hz > 0.0 {
        let gap = Exp::new(cfg.blink_rate_hz).expect("positive rate");
        let pulse_len = (BLINK_DURATION_S * fs).round() as usize;
        let amp = BLINK_AMP_FACTOR * cfg.alpha_amp_uv;
        for s in segments.iter().filter(|s| s.label == Label::NonAlpha) {
            let mut t = gap.sample(&mut rng);
            loop {
                let onset = s.start + (t * fs).round() as usize;
                if onset >= s.start + s.len {
                    break;
                }
                for (i, b) in blinks[onset..(onset + pulse_len).min(n)].iter_mut().enumerate() {
                    *b += blink_pulse(i, fs, amp);
                }
                t += gap.sample(&mut rng);
            }
        }
    }

    let white = Normal::new(0.0, cfg.sensor_noise_uv.max(0.0)).expect("finite sigma");
    let mut samples = Vec::with_capacity(ElectrodeName::ALL.len());
    for e in ElectrodeName::ALL {
        let g = cfg.gain(e);
        let mut row = pink_noise(n, cfg.background_amp_uv * g, &mut rng);
        let alpha_amp = cfg.alpha_amp_uv * g;
        for (v, c) in row.iter_mut().zip(&carrier) {
            *v += alpha_amp * c + white.sample(&mut rng);
        }
        if matches!(e, ElectrodeName::Fp1 | ElectrodeName::Fp2) {
            row.iter_mut().zip(&blinks).for_each(|(v, b)| *v += b);
        }
        let mean = row.iter().sum::<f64>() / n as f64;
        row.iter_mut().for_each(|v| *v -= mean);
        samples.push(row);
    }

    Recording::new(
        format!("synth_{:020}", cfg.seed),
        fs,
        ElectrodeName::ALL.to_vec(),
        samples,
        labels,
    )
}

/// `n_recordings` recordings from seeds `cfg.seed, cfg.seed + 1, ...`.
pub fn generate_corpus(cfg: &SynthConfig, n_recordings: usize) -> Result<Vec<Recording>> {
    if n_recordings == 0 {
        return Err(Error::invariant("corpus needs at least one recording"));
    }
    cfg.validate()?;
    (0..n_recordings as u64)
        .into_par_iter()
        .map(|i| {
            let c = SynthConfig {
                seed: cfg.seed.wrapping_add(i),
                ..cfg.clone()
            };
            generate(&c)
        })
        .collect()
}
