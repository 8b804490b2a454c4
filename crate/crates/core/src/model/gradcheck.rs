//! Central finite-difference check of the hand-derived gradients.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::net::{Mlp, MlpGrads};
use super::{loss_and_grads, NetSpec, Phase, TrainConfig, UsadNet};

pub const FD_STEP: f64 = 1e-5;
/// Networks with any pre-activation this close to the ReLU kink are redrawn,
/// since a finite-difference step could cross it.
pub const KINK_MARGIN: f64 = 1e-4;
const GRAD_FLOOR: f64 = 1e-6;
const MAX_REDRAWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest relative error over every parameter of all three networks,
    /// for both objectives.
    pub max_rel_error: f64,
    pub n_params_checked: usize,
    pub redraws: usize,
}

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

fn objective(net: &UsadNet, batch: &Array2<f64>, epoch: usize, phase: Phase) -> f64 {
    let (w1, w21) = net.reconstruct(batch);
    let n = batch.len() as f64;
    let mse = |y: &Array2<f64>| (y - batch).mapv(|v| v * v).sum() / n;
    let (a, b) = super::epoch_weights(epoch);
    match phase {
        Phase::One => a * mse(&w1) + b * mse(&w21),
        Phase::Two => {
            let w2 = net.decoder2.forward(&net.encoder.forward(batch));
            a * mse(&w2) - b * mse(&w21)
        }
    }
}

fn near_kink(net: &UsadNet, batch: &Array2<f64>, epoch: usize) -> bool {
    let (_, _, caches) = loss_and_grads(net, batch, epoch, Phase::Two, [false; 3]);
    caches.iter().any(|c| {
        // output layers are smooth, only the ReLU hidden layers have a kink
        let p = c.preactivations();
        p[..p.len() - 1]
            .iter()
            .any(|z| z.iter().any(|v| v.abs() < KINK_MARGIN))
    })
}

fn random_net(spec: &NetSpec, rng: &mut ChaCha8Rng) -> UsadNet {
    let mut net = UsadNet::glorot(spec, rng);
    for m in [&mut net.encoder, &mut net.decoder1, &mut net.decoder2] {
        for l in &mut m.layers {
            l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        }
    }
    net
}

fn net_mut(net: &mut UsadNet, which: usize) -> &mut Mlp {
    match which {
        0 => &mut net.encoder,
        1 => &mut net.decoder1,
        _ => &mut net.decoder2,
    }
}

/// Parameters are numbered layer by layer: weights (row-major), then bias.
fn param_mut(net: &mut Mlp, idx: usize) -> &mut f64 {
    let mut i = idx;
    for l in &mut net.layers {
        let n_w = l.weights.len();
        if i < n_w {
            return &mut l.weights.as_slice_mut().expect("standard layout")[i];
        }
        i -= n_w;
        if i < l.bias.len() {
            return &mut l.bias[i];
        }
        i -= l.bias.len();
    }
    panic!("parameter index {idx} out of range")
}

fn check_one(net: &UsadNet, batch: &Array2<f64>, epoch: usize, phase: Phase) -> (f64, usize) {
    let (_, grads, _) = loss_and_grads(net, batch, epoch, phase, [true; 3]);
    let groups: [(usize, &MlpGrads); 3] = [(0, &grads.encoder), (1, &grads.decoder1), (2, &grads.decoder2)];
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (which, g) in groups {
        for (idx, analytic) in g.iter_values().enumerate() {
            let orig = *param_mut(net_mut(&mut probe, which), idx);
            *param_mut(net_mut(&mut probe, which), idx) = orig + FD_STEP;
            let plus = objective(&probe, batch, epoch, phase);
            *param_mut(net_mut(&mut probe, which), idx) = orig - FD_STEP;
            let minus = objective(&probe, batch, epoch, phase);
            *param_mut(net_mut(&mut probe, which), idx) = orig;
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            worst = worst.max(rel_error(analytic, numeric));
            count += 1;
        }
    }
    (worst, count)
}

/// Compares analytic gradients of both objectives against central finite
/// differences on a randomly initialised network.
///
/// The network is drawn from `cfg.seed`; draws with a hidden pre-activation
/// within [`KINK_MARGIN`] of zero are rejected and redrawn.
pub fn gradient_check(spec: &NetSpec, cfg: &TrainConfig, batch: &Array2<f64>, epoch: usize) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut redraws = 0;
    let net = loop {
        let net = random_net(spec, &mut rng);
        if !near_kink(&net, batch, epoch) || redraws >= MAX_REDRAWS {
            break net;
        }
        redraws += 1;
    };
    gradient_check_net(&net, batch, epoch, redraws)
}

/// Same as [`gradient_check`] for a caller-supplied network.
pub fn gradient_check_net(net: &UsadNet, batch: &Array2<f64>, epoch: usize, redraws: usize) -> GradCheckReport {
    let (e1, n1) = check_one(net, batch, epoch, Phase::One);
    let (e2, n2) = check_one(net, batch, epoch, Phase::Two);
    GradCheckReport {
        max_rel_error: e1.max(e2),
        n_params_checked: n1 + n2,
        redraws,
    }
}
