//! Independent reference implementations: direct formulas, an O(N²) DFT,
//! plain-loop networks and central finite differences.

use std::f64::consts::PI;

use eeg_setup::features::spectrum::{hann, periodogram};
use eeg_setup::features::window_features;
use eeg_setup::model::net::{Dense, Mlp};
use eeg_setup::model::{loss_and_grads, Activation, Phase, UsadGrads, UsadNet};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FS: f64 = 256.0;

/// Direct O(N²) one-sided periodogram of the Hann-windowed signal.
pub fn naive_periodogram(x: &[f64], fs: f64) -> Vec<f64> {
    let n = x.len();
    let w: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
    let s2: f64 = w.iter().map(|v| v * v).sum();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for t in 0..n {
                let arg = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += w[t] * x[t] * arg.cos();
                im += w[t] * x[t] * arg.sin();
            }
            let p = (re * re + im * im) / (fs * s2);
            if k == 0 || k == n / 2 {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

pub fn naive_features(x: &[f64], fs: f64) -> [f64; 8] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let std = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if s.len() % 2 == 0 {
        (s[s.len() / 2 - 1] + s[s.len() / 2]) / 2.0
    } else {
        s[s.len() / 2]
    };
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let p = naive_periodogram(x, fs);
    let ac = &p[1..];
    let max_psd = ac.iter().cloned().fold(f64::MIN, f64::max);
    let mean_psd = ac.iter().sum::<f64>() / ac.len() as f64;
    [mean, std, median, s[0], s[s.len() - 1], rms, max_psd, mean_psd]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-300 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn random_window(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let offset = rng.random_range(-50.0..50.0);
    let amp = rng.random_range(0.1..100.0);
    let f = rng.random_range(1.0..100.0);
    (0..n)
        .map(|i| offset + amp * (2.0 * PI * f * i as f64 / FS).sin() + rng.random_range(-amp..amp))
        .collect()
}

/// Worst relative error of the library's eight features against
/// [`naive_features`] over `n` random 256-sample windows.
pub fn feature_max_rel_error(n: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let x = random_window(&mut rng, 256);
        for (g, w) in window_features(&x, FS).iter().zip(&naive_features(&x, FS)) {
            worst = worst.max(rel_err(*g, *w));
        }
    }
    worst
}

/// Worst relative gap between `Σ P[k]·Δf` and the Hann-windowed mean power
/// over `n` random signals of power-of-two length.
pub fn parseval_max_rel_error(n: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let len = 1 << rng.random_range(4..11);
        let x = random_window(&mut rng, len);
        let w = hann(len);
        let s2: f64 = w.iter().map(|v| v * v).sum();
        let windowed_power = x.iter().zip(&w).map(|(a, b)| (a * b).powi(2)).sum::<f64>() / s2;
        let df = FS / len as f64;
        let total: f64 = periodogram(&x, FS).iter().map(|p| p * df).sum();
        worst = worst.max(rel_err(total, windowed_power));
    }
    worst
}

pub const H: f64 = 1e-5;

/// Plain-loop forward pass returning every hidden pre-activation.
pub fn naive_forward(m: &Mlp, x: &[f64], pre: &mut Vec<f64>) -> Vec<f64> {
    let mut a = x.to_vec();
    let last = m.layers.len() - 1;
    for (li, l) in m.layers.iter().enumerate() {
        let mut next = vec![0.0; l.n_out()];
        for (o, v) in next.iter_mut().enumerate() {
            let mut s = l.bias[o];
            for (i, xi) in a.iter().enumerate() {
                s += l.weights[[o, i]] * xi;
            }
            if li < last {
                pre.push(s);
                s = s.max(0.0);
            } else if m.output == Activation::Sigmoid {
                s = 1.0 / (1.0 + (-s).exp());
            }
            *v = s;
        }
        a = next;
    }
    a
}

pub fn mse_rows(batch: &[Vec<f64>], out: &[Vec<f64>]) -> f64 {
    let n: usize = batch.iter().map(Vec::len).sum();
    batch
        .iter()
        .zip(out)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)))
        .sum::<f64>()
        / n as f64
}

/// The two adversarial objectives, written out directly.
pub fn naive_objective(net: &UsadNet, batch: &[Vec<f64>], epoch: usize, phase: Phase, pre: &mut Vec<f64>) -> f64 {
    let n = epoch as f64;
    let mut w1 = Vec::new();
    let mut w2 = Vec::new();
    let mut w21 = Vec::new();
    for x in batch {
        let z = naive_forward(&net.encoder, x, pre);
        let a1 = naive_forward(&net.decoder1, &z, pre);
        w2.push(naive_forward(&net.decoder2, &z, pre));
        let z1 = naive_forward(&net.encoder, &a1, pre);
        w21.push(naive_forward(&net.decoder2, &z1, pre));
        w1.push(a1);
    }
    match phase {
        Phase::One => mse_rows(batch, &w1) / n + (1.0 - 1.0 / n) * mse_rows(batch, &w21),
        Phase::Two => mse_rows(batch, &w2) / n - (1.0 - 1.0 / n) * mse_rows(batch, &w21),
    }
}

pub fn random_mlp(dims: &[usize], output: Activation, rng: &mut ChaCha8Rng) -> Mlp {
    Mlp {
        output,
        layers: dims
            .windows(2)
            .map(|d| Dense {
                weights: Array2::from_shape_fn((d[1], d[0]), |_| rng.random_range(-0.8..0.8)),
                bias: Array1::from_shape_fn(d[1], |_| rng.random_range(-0.5..0.5)),
            })
            .collect(),
    }
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (UsadNet, Vec<Vec<f64>>, usize) {
    let input = rng.random_range(3..=12);
    let latent = rng.random_range(1..input);
    let hidden: Vec<usize> = (0..rng.random_range(0..=2)).map(|_| rng.random_range(1..=8)).collect();
    let mut enc = vec![input];
    enc.extend(&hidden);
    enc.push(latent);
    let dec: Vec<usize> = enc.iter().rev().copied().collect();
    let out = if rng.random_bool(0.5) { Activation::Sigmoid } else { Activation::Linear };
    let net = UsadNet {
        encoder: random_mlp(&enc, Activation::Linear, rng),
        decoder1: random_mlp(&dec, out, rng),
        decoder2: random_mlp(&dec, out, rng),
    };
    let batch = (0..rng.random_range(1..=6))
        .map(|_| (0..input).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    (net, batch, rng.random_range(1..=60))
}

pub fn to_array(batch: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((batch.len(), batch[0].len()), |(r, c)| batch[r][c])
}

pub fn params_mut(net: &mut UsadNet) -> Vec<&mut f64> {
    [&mut net.encoder, &mut net.decoder1, &mut net.decoder2]
        .into_iter()
        .flat_map(|m| m.layers.iter_mut())
        .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
        .collect()
}

pub fn grad_values(g: &UsadGrads) -> Vec<f64> {
    [&g.encoder, &g.decoder1, &g.decoder2]
        .into_iter()
        .flat_map(|m| m.layers.iter())
        .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
        .collect()
}

/// Checks `n_nets` random networks (both objectives, every parameter)
/// against central differences of [`naive_objective`]. Returns the worst
/// relative error.
pub fn finite_difference_check(n_nets: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut worst = 0.0f64;
    while checked < n_nets {
        let (net, batch, epoch) = random_case(&mut rng);
        let mut pre = Vec::new();
        naive_objective(&net, &batch, epoch, Phase::Two, &mut pre);
        if pre.iter().any(|z| z.abs() < 1e-4) {
            continue;
        }
        for phase in [Phase::One, Phase::Two] {
            let (_, grads, _) = loss_and_grads(&net, &to_array(&batch), epoch, phase, [true; 3]);
            let analytic = grad_values(&grads);
            for (p, a) in analytic.iter().enumerate() {
                let mut plus = net.clone();
                *params_mut(&mut plus)[p] += H;
                let mut minus = net.clone();
                *params_mut(&mut minus)[p] -= H;
                let fd = (naive_objective(&plus, &batch, epoch, phase, &mut Vec::new())
                    - naive_objective(&minus, &batch, epoch, phase, &mut Vec::new()))
                    / (2.0 * H);
                worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-6));
            }
        }
        checked += 1;
    }
    worst
}
