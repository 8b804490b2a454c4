//! Dual-decoder autoencoder for one-class scoring.
//!
//! A shared encoder `E` feeds two decoders `D1`, `D2`, giving
//! `AE1 = D1∘E` and `AE2 = D2∘E`. Training alternates two updates per
//! mini-batch `W` in epoch `n` (1-based):
//!
//! ```text
//! loss1 = 1/n · mse(W, AE1(W)) + (1 − 1/n) · mse(W, AE2(AE1(W)))   → E, D1
//! loss2 = 1/n · mse(W, AE2(W)) − (1 − 1/n) · mse(W, AE2(AE1(W)))   → E, D2
//! ```
//!
//! so `D2` learns to tell real windows from `AE1` reconstructions while
//! `AE1` learns to fool it. The anomaly score of a window `x` is
//! `α‖x − AE1(x)‖₂ + β‖x − AE2(AE1(x))‖₂`.

pub mod adam;
pub mod gradcheck;
pub mod io;
pub mod net;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, SetUp};
use crate::error::{Error, Result};
use crate::eval::ThresholdRule;
use crate::features::{FeatureConfig, ModelWindow, Normalizer, N_FEATURES};

use adam::Adam;
use net::{Mlp, MlpCache, MlpGrads};

pub use gradcheck::{gradient_check, GradCheckReport};
pub use io::{load_model, save_model, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Linear,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative with respect to the pre-activation `z`; ReLU takes 0 at the kink.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
            Activation::Sigmoid => {
                let s = Activation::Sigmoid.apply(z);
                s * (1.0 - s)
            }
        }
    }
}

/// Layer sizes of the encoder; decoders mirror it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_dim: usize,
    pub latent_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl NetSpec {
    /// Checked constructor.
    pub fn new(input_dim: usize, latent_dim: usize, hidden_dims: Vec<usize>) -> Result<Self> {
        let spec = NetSpec {
            input_dim,
            latent_dim,
            hidden_dims,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Sigmoid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_output(mut self, output_activation: Activation) -> Result<Self> {
        self.output_activation = output_activation;
        self.validate()?;
        Ok(self)
    }

    /// Default shape for `m` channels and `k` feature rows per window:
    /// input `k·m·8`, latent `round(0.5·m·8)`, one hidden layer of
    /// `ceil(input/2)`.
    pub fn for_setup(m: usize, k: usize) -> Result<Self> {
        let input_dim = k * m * N_FEATURES;
        let latent_dim = (0.5 * (m * N_FEATURES) as f64).round() as usize;
        NetSpec::new(input_dim, latent_dim, vec![input_dim.div_ceil(2)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.latent_dim == 0 {
            return Err(Error::invariant("network dimensions must be positive"));
        }
        if self.latent_dim >= self.input_dim {
            return Err(Error::invariant(format!(
                "latent_dim {} must be smaller than input_dim {}",
                self.latent_dim, self.input_dim
            )));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::invariant("hidden layers must be non-empty"));
        }
        if self.hidden_activation != Activation::Relu || self.output_activation == Activation::Relu {
            return Err(Error::invariant(
                "hidden layers must use ReLU and the output layer sigmoid or linear",
            ));
        }
        Ok(())
    }

    pub fn encoder_dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim];
        d.extend(&self.hidden_dims);
        d.push(self.latent_dim);
        d
    }

    pub fn decoder_dims(&self) -> Vec<usize> {
        let mut d = self.encoder_dims();
        d.reverse();
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    UniformGlorot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub init: Init,
    /// Score weight of the first autoencoder's error.
    pub alpha: f64,
    /// Score weight of the chained `AE2(AE1(x))` error.
    pub beta: f64,
    /// Decoder output layer. `sigmoid` pairs with min-max input scaling,
    /// `linear` with z-scores.
    pub output_activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            seed: 0,
            init: Init::UniformGlorot,
            alpha: 0.5,
            beta: 0.5,
            output_activation: Activation::Sigmoid,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invariant("epochs and batch_size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invariant("learning_rate must be positive"));
        }
        if self.output_activation == Activation::Relu {
            return Err(Error::invariant("output_activation must be sigmoid or linear"));
        }
        check_weights(self.alpha, self.beta)
    }
}

fn check_weights(alpha: f64, beta: f64) -> Result<()> {
    if alpha < 0.0 || beta < 0.0 || (alpha + beta - 1.0).abs() > 1e-12 {
        return Err(Error::invariant(format!(
            "score weights must be non-negative and sum to 1, got alpha={alpha} beta={beta}"
        )));
    }
    Ok(())
}

/// Encoder plus both decoders.
#[derive(Debug, Clone, PartialEq)]
pub struct UsadNet {
    pub encoder: Mlp,
    pub decoder1: Mlp,
    pub decoder2: Mlp,
}

impl UsadNet {
    pub fn glorot(spec: &NetSpec, rng: &mut ChaCha8Rng) -> Self {
        UsadNet {
            encoder: Mlp::glorot(&spec.encoder_dims(), Activation::Linear, rng),
            decoder1: Mlp::glorot(&spec.decoder_dims(), spec.output_activation, rng),
            decoder2: Mlp::glorot(&spec.decoder_dims(), spec.output_activation, rng),
        }
    }

    pub fn zeros(spec: &NetSpec) -> Self {
        UsadNet {
            encoder: Mlp::zeros(&spec.encoder_dims(), Activation::Linear),
            decoder1: Mlp::zeros(&spec.decoder_dims(), spec.output_activation),
            decoder2: Mlp::zeros(&spec.decoder_dims(), spec.output_activation),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.is_finite() && self.decoder1.is_finite() && self.decoder2.is_finite()
    }

    /// Returns `(AE1(x), AE2(AE1(x)))` for a batch.
    pub fn reconstruct(&self, x: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let w1 = self.decoder1.forward(&self.encoder.forward(x));
        let w21 = self.decoder2.forward(&self.encoder.forward(&w1));
        (w1, w21)
    }
}

/// Which of the two adversarial objectives to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// `loss1`, minimised by the encoder and the first decoder.
    One,
    /// `loss2`, minimised by the encoder and the second decoder.
    Two,
}

/// Mean-squared errors of one mini-batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    /// `mse(W, AE1(W))`
    pub ae1: f64,
    /// `mse(W, AE2(W))`; only evaluated in [`Phase::Two`].
    pub ae2: f64,
    /// `mse(W, AE2(AE1(W)))`
    pub ae21: f64,
}

/// `(1/n, 1 − 1/n)` for 1-based epoch `n`.
pub fn epoch_weights(epoch: usize) -> (f64, f64) {
    let a = 1.0 / epoch.max(1) as f64;
    (a, 1.0 - a)
}

impl LossTerms {
    pub fn loss1(&self, epoch: usize) -> f64 {
        let (a, b) = epoch_weights(epoch);
        a * self.ae1 + b * self.ae21
    }

    pub fn loss2(&self, epoch: usize) -> f64 {
        let (a, b) = epoch_weights(epoch);
        a * self.ae2 - b * self.ae21
    }
}

/// Gradients of one objective with respect to all three networks.
#[derive(Debug, Clone, PartialEq)]
pub struct UsadGrads {
    pub encoder: MlpGrads,
    pub decoder1: MlpGrads,
    pub decoder2: MlpGrads,
}

fn mse(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.len() as f64;
    ndarray::Zip::from(a)
        .and(b)
        .fold(0.0, |s, &x, &y| s + (x - y) * (x - y))
        / n
}

/// `scale · (pred − target)`
fn residual_grad(pred: &Array2<f64>, target: &Array2<f64>, scale: f64) -> Array2<f64> {
    let mut g = pred - target;
    g *= scale;
    g
}

/// Forward and backward pass for one objective.
///
/// `accumulate` selects which of (encoder, decoder1, decoder2) receive
/// parameter gradients; the rest are only back-propagated through.
pub fn loss_and_grads(
    net: &UsadNet,
    batch: &Array2<f64>,
    epoch: usize,
    phase: Phase,
    accumulate: [bool; 3],
) -> (LossTerms, UsadGrads, Vec<MlpCache>) {
    let (a, b) = epoch_weights(epoch);
    let scale = 2.0 / batch.len() as f64;
    let mut grads = UsadGrads {
        encoder: MlpGrads::zeros_like(&net.encoder),
        decoder1: MlpGrads::zeros_like(&net.decoder1),
        decoder2: MlpGrads::zeros_like(&net.decoder2),
    };
    let [acc_e, acc_d1, acc_d2] = accumulate;

    let (z, c_e1) = net.encoder.forward_cached(batch);
    let (w1, c_d1) = net.decoder1.forward_cached(&z);
    let (z2, c_e2) = net.encoder.forward_cached(&w1);
    let (w21, c_d2b) = net.decoder2.forward_cached(&z2);

    let mut terms = LossTerms {
        ae1: mse(batch, &w1),
        ae2: 0.0,
        ae21: mse(batch, &w21),
    };

    let sign21 = match phase {
        Phase::One => b,
        Phase::Two => -b,
    };
    let g21 = residual_grad(&w21, batch, sign21 * scale);
    let gz2 = net
        .decoder2
        .backward(&c_d2b, g21, acc_d2.then_some(&mut grads.decoder2));
    let gw1 = net
        .encoder
        .backward(&c_e2, gz2, acc_e.then_some(&mut grads.encoder));

    let mut caches = vec![c_e1.clone(), c_d1.clone(), c_e2, c_d2b];
    let gz = match phase {
        Phase::One => {
            let gw1 = gw1 + residual_grad(&w1, batch, a * scale);
            net.decoder1
                .backward(&c_d1, gw1, acc_d1.then_some(&mut grads.decoder1))
        }
        Phase::Two => {
            let gz_a = net
                .decoder1
                .backward(&c_d1, gw1, acc_d1.then_some(&mut grads.decoder1));
            let (w2, c_d2a) = net.decoder2.forward_cached(&z);
            terms.ae2 = mse(batch, &w2);
            let g2 = residual_grad(&w2, batch, a * scale);
            let gz_b = net
                .decoder2
                .backward(&c_d2a, g2, acc_d2.then_some(&mut grads.decoder2));
            caches.push(c_d2a);
            gz_a + gz_b
        }
    };
    net.encoder
        .backward(&c_e1, gz, acc_e.then_some(&mut grads.encoder));
    (terms, grads, caches)
}

/// Training bookkeeping stored with the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub n_train_windows: usize,
    /// Epoch-mean losses of the last epoch.
    pub final_losses: FinalLosses,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FinalLosses {
    pub loss1: f64,
    pub loss2: f64,
    pub ae1_mse: f64,
    pub ae2_mse: f64,
    pub ae21_mse: f64,
}

/// What a stored model needs to score new recordings on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorMeta {
    pub setup: SetUp,
    pub features: FeatureConfig,
    pub positive_class: Label,
    pub threshold: f64,
    pub threshold_rule: ThresholdRule,
}

/// Trained dual-decoder autoencoder with its input normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct UsadModel {
    pub spec: NetSpec,
    pub net: UsadNet,
    pub normalizer: Normalizer,
    pub alpha: f64,
    pub beta: f64,
    pub train_meta: TrainMeta,
    pub detector: Option<DetectorMeta>,
}

/// `D(E(x))` for a single input vector.
pub fn forward_ae(encoder: &Mlp, decoder: &Mlp, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != encoder.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: encoder.input_dim(),
            got: x.len(),
        });
    }
    let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    Ok(decoder.forward(&encoder.forward(&row)).into_raw_vec_and_offset().0)
}

/// Euclidean norm of `x − x_hat`.
pub fn reconstruction_error(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_hat.len(),
        });
    }
    Ok(x.iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `α·e1 + β·e2`.
pub fn combine_errors(alpha: f64, beta: f64, err1: f64, err2: f64) -> f64 {
    alpha * err1 + beta * err2
}

fn to_batch(rows: &[&[f64]], dim: usize) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), dim));
    for (mut dst, src) in out.rows_mut().into_iter().zip(rows) {
        dst.assign(&ndarray::ArrayView1::from(*src));
    }
    out
}

/// Trains on positive-class windows only. The normalizer is fitted on
/// `windows` and applied before training: min-max to `[0, 1]` for a
/// sigmoid output, z-scores for a linear one.
pub fn train(windows: &[ModelWindow], spec: &NetSpec, cfg: &TrainConfig) -> Result<UsadModel> {
    spec.validate()?;
    cfg.validate()?;
    let first = windows.first().ok_or(Error::EmptyTrainingSet)?;
    if windows.iter().any(|w| w.label != first.label) {
        return Err(Error::MixedClassTraining);
    }
    if let Some(w) = windows.iter().find(|w| w.flat.len() != spec.input_dim) {
        return Err(Error::DimensionMismatch {
            expected: spec.input_dim,
            got: w.flat.len(),
        });
    }

    let normalizer = match spec.output_activation {
        Activation::Sigmoid => Normalizer::fit_min_max(windows)?,
        _ => Normalizer::fit(windows)?,
    };
    let data: Vec<Vec<f64>> = windows
        .iter()
        .map(|w| normalizer.apply_slice(&w.flat))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = UsadNet::glorot(spec, &mut rng);
    let mut opt1 = Adam::new(cfg.learning_rate, &[&net.encoder, &net.decoder1]);
    let mut opt2 = Adam::new(cfg.learning_rate, &[&net.encoder, &net.decoder2]);

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut final_losses = FinalLosses::default();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = FinalLosses::default();
        let mut n_batches = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let rows: Vec<&[f64]> = idx.iter().map(|&i| data[i].as_slice()).collect();
            let batch = to_batch(&rows, spec.input_dim);

            let (t1, g1, _) = loss_and_grads(&net, &batch, epoch, Phase::One, [true, true, false]);
            opt1.step(
                &mut [&mut net.encoder, &mut net.decoder1],
                &[&g1.encoder, &g1.decoder1],
            );
            let (t2, g2, _) = loss_and_grads(&net, &batch, epoch, Phase::Two, [true, false, true]);
            opt2.step(
                &mut [&mut net.encoder, &mut net.decoder2],
                &[&g2.encoder, &g2.decoder2],
            );

            let l1 = t1.loss1(epoch);
            let l2 = t2.loss2(epoch);
            if !(l1.is_finite() && l2.is_finite()) || !net.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            sums.loss1 += l1;
            sums.loss2 += l2;
            sums.ae1_mse += t1.ae1;
            sums.ae2_mse += t2.ae2;
            sums.ae21_mse += t1.ae21;
            n_batches += 1.0;
        }
        final_losses = FinalLosses {
            loss1: sums.loss1 / n_batches,
            loss2: sums.loss2 / n_batches,
            ae1_mse: sums.ae1_mse / n_batches,
            ae2_mse: sums.ae2_mse / n_batches,
            ae21_mse: sums.ae21_mse / n_batches,
        };
    }

    Ok(UsadModel {
        spec: spec.clone(),
        net,
        normalizer,
        alpha: cfg.alpha,
        beta: cfg.beta,
        train_meta: TrainMeta {
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            batch_size: cfg.batch_size,
            seed: cfg.seed,
            n_train_windows: windows.len(),
            final_losses,
        },
        detector: None,
    })
}

impl UsadModel {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        check_weights(self.alpha, self.beta)?;
        let enc = self.spec.encoder_dims();
        let dec = self.spec.decoder_dims();
        let shape_ok = |m: &Mlp, dims: &[usize]| {
            m.layers.len() + 1 == dims.len()
                && m.layers
                    .iter()
                    .zip(dims.windows(2))
                    .all(|(l, d)| l.n_in() == d[0] && l.n_out() == d[1])
        };
        if !shape_ok(&self.net.encoder, &enc)
            || !shape_ok(&self.net.decoder1, &dec)
            || !shape_ok(&self.net.decoder2, &dec)
        {
            return Err(Error::invariant("layer shapes do not match the network spec"));
        }
        if !self.net.is_finite() {
            return Err(Error::invariant("model has non-finite weights"));
        }
        if self.normalizer.dim() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                got: self.normalizer.dim(),
            });
        }
        Ok(())
    }

    pub fn ae1(&self, x: &[f64]) -> Result<Vec<f64>> {
        forward_ae(&self.net.encoder, &self.net.decoder1, x)
    }

    pub fn ae2(&self, x: &[f64]) -> Result<Vec<f64>> {
        forward_ae(&self.net.encoder, &self.net.decoder2, x)
    }

    /// Latent code `E(x)`.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
        Ok(self.net.encoder.forward(&row).into_raw_vec_and_offset().0)
    }

    /// Anomaly score of an already-normalized window.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let w1 = self.ae1(x)?;
        let w21 = self.ae2(&w1)?;
        Ok(combine_errors(
            self.alpha,
            self.beta,
            reconstruction_error(x, &w1)?,
            reconstruction_error(x, &w21)?,
        ))
    }

    /// Normalizes and scores a batch of raw windows.
    pub fn score_windows(&self, windows: &[ModelWindow]) -> Result<Vec<f64>> {
        if windows.is_empty() {
            return Ok(Vec::new());
        }
        let rows = windows
            .iter()
            .map(|w| self.normalizer.apply_slice(&w.flat))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let x = to_batch(&refs, self.spec.input_dim);
        let (w1, w21) = self.net.reconstruct(&x);
        Ok(x.rows()
            .into_iter()
            .zip(w1.rows())
            .zip(w21.rows())
            .map(|((x, a), b)| {
                let e1 = x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                let e2 = x.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                combine_errors(self.alpha, self.beta, e1, e2)
            })
            .collect())
    }
}
