//! FFT helpers and the Hann-windowed one-sided periodogram.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place DFT of any length. The inverse transform is not scaled by `1/N`.
pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    if buf.len() <= 1 {
        return;
    }
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(buf);
}

/// Forward transform of a real signal.
pub fn fft_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    buf
}

/// Periodic Hann window, `w[n] = 0.5 (1 - cos(2πn/N))`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// One-sided power spectral density in units²/Hz.
///
/// `P[k] = |DFT(w·x)[k]|² / (fs · Σw²)` for `k = 0..=N/2`, with every bin
/// except DC and Nyquist doubled so that `Σ P[k]·fs/N` equals the windowed
/// mean power `Σ(w·x)² / Σw²`.
pub fn periodogram(x: &[f64], fs: f64) -> Vec<f64> {
    let n = x.len();
    let w = hann(n);
    let norm = fs * w.iter().map(|v| v * v).sum::<f64>();
    let windowed: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
    let spec = fft_real(&windowed);
    (0..=n / 2)
        .map(|k| {
            let p = spec[k].norm_sqr() / norm;
            if k == 0 || k == n / 2 {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

/// Mean periodogram power over bins whose centre lies in `[lo_hz, hi_hz]`.
pub fn band_power(psd: &[f64], fs: f64, n: usize, lo_hz: f64, hi_hz: f64) -> f64 {
    let df = fs / n as f64;
    let (sum, count) = psd
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = *k as f64 * df;
            f >= lo_hz && f <= hi_hz
        })
        .fold((0.0, 0usize), |(s, c), (_, p)| (s + p, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, &v)| {
                        Complex64::from_polar(v, -2.0 * PI * (k * t % n) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 7919) % 31) as f64 - 15.0).collect();
        let fast = fft_real(&x);
        let slow = naive_dft(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut buf = fft_real(&x);
        fft_in_place(&mut buf, true);
        for (a, b) in buf.iter().zip(&x) {
            assert!((a.re / 32.0 - b).abs() < 1e-12);
            assert!(a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn non_power_of_two() {
        let x: Vec<f64> = (0..45).map(|i| (i as f64 * 1.3).cos() + 0.1 * i as f64).collect();
        for (a, b) in fft_real(&x).iter().zip(&naive_dft(&x)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn length_one_is_identity() {
        let mut buf = vec![Complex64::new(3.0, -1.0)];
        fft_in_place(&mut buf, false);
        assert_eq!(buf[0], Complex64::new(3.0, -1.0));
    }

    #[test]
    fn ten_hz_peak() {
        let fs = 256.0;
        let x: Vec<f64> = (0..256)
            .map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin())
            .collect();
        let p = periodogram(&x, fs);
        assert_eq!(p.len(), 129);
        let argmax = (1..p.len())
            .max_by(|&a, &b| p[a].total_cmp(&p[b]))
            .unwrap();
        assert_eq!(argmax, 10);
        assert!(band_power(&p, fs, 256, 8.0, 12.0) > 100.0 * band_power(&p, fs, 256, 30.0, 40.0));
    }
}
