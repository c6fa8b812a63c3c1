use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::features::encode_features;
use super::model::{clipped, logistic, Network, NnueModel, HIDDEN};
use super::{cp_to_wdl, DEFAULT_WDL_SCALE};
use crate::board::{Centipawns, Position};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f32,
    pub momentum: f32,
    /// Learning-rate factor applied whenever validation MSE fails to improve.
    pub lr_decay: f32,
    pub batch_size: usize,
    pub epochs: usize,
    pub wdl_scale: f32,
    pub seed: u64,
    pub validation_fraction: f32,
    pub input_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.1,
            momentum: 0.9,
            lr_decay: 0.5,
            batch_size: 1024,
            epochs: 30,
            wdl_scale: DEFAULT_WDL_SCALE,
            seed: 1,
            validation_fraction: 0.1,
            input_dim: super::STANDARD_INPUT_DIM,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr decay must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch size and epochs must be positive");
        }
        if !(self.wdl_scale > 0.0) {
            return bad("wdl scale must be positive");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction <= 0.5) {
            return bad("validation fraction must lie in (0, 0.5]");
        }
        if super::FeatureSet::new(self.input_dim).is_none() {
            return bad("input dim below the standard encoder width");
        }
        Ok(())
    }
}

/// One training example, features already split by perspective.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub stm: Vec<u16>,
    pub other: Vec<u16>,
    pub target: f32,
}

impl TrainSample {
    pub fn new(pos: &Position, label: Centipawns, wdl_scale: f32) -> TrainSample {
        let [red, black] = encode_features(pos);
        let (stm, other) = match pos.side_to_move() {
            crate::board::Color::Red => (red, black),
            crate::board::Color::Black => (black, red),
        };
        TrainSample {
            stm,
            other,
            target: cp_to_wdl(label, wdl_scale),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub learning_rate: f32,
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub model: NnueModel,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
}

impl TrainedModel {
    pub fn best_val_mse(&self) -> f64 {
        self.log[self.best_epoch - 1].val_mse
    }

    /// `epoch,train_mse,val_mse` lines with a header.
    pub fn csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse\n");
        for e in &self.log {
            out.push_str(&format!("{},{:.9},{:.9}\n", e.epoch, e.train_mse, e.val_mse));
        }
        out
    }
}

fn forward_sample<T: Float>(net: &Network<T>, s: &TrainSample) -> ([T; HIDDEN], [T; HIDDEN], T) {
    let a = net.transform(&s.stm);
    let b = net.transform(&s.other);
    let out = logistic(net.output_logit(&a, &b));
    (a, b, out)
}

/// Mean squared error against the samples' targets.
pub fn batch_loss<T: Float>(net: &Network<T>, samples: &[&TrainSample]) -> T {
    let mut sum = T::zero();
    for s in samples {
        let (_, _, out) = forward_sample(net, s);
        let e = out - T::from(s.target).unwrap();
        sum = sum + e * e;
    }
    sum / T::from(samples.len()).unwrap()
}

/// Adds d(MSE)/d(params) over `samples` into `grad` and returns the MSE.
/// The clipped activation's derivative is 1 on the closed interval [0, 1]
/// and 0 outside it. Feature rows written are appended to `touched`.
fn accumulate_gradient<T: Float>(
    net: &Network<T>,
    samples: &[&TrainSample],
    grad: &mut Network<T>,
    touched: &mut Vec<u16>,
) -> T {
    let n = T::from(samples.len()).unwrap();
    let two = T::from(2.0).unwrap();
    let mut loss = T::zero();
    for s in samples {
        let (a, b, out) = forward_sample(net, s);
        let err = out - T::from(s.target).unwrap();
        loss = loss + err * err;
        let dz = two * err * out * (T::one() - out) / n;
        grad.output_bias = grad.output_bias + dz;

        for (half, acc, features) in [(0, &a, &s.stm), (1, &b, &s.other)] {
            let ow = &net.output_weights[half * HIDDEN..(half + 1) * HIDDEN];
            let mut dacc = [T::zero(); HIDDEN];
            for j in 0..HIDDEN {
                grad.output_weights[half * HIDDEN + j] = grad.output_weights[half * HIDDEN + j] + dz * clipped(acc[j]);
                if acc[j] >= T::zero() && acc[j] <= T::one() {
                    dacc[j] = dz * ow[j];
                }
            }
            for j in 0..HIDDEN {
                grad.feature_bias[j] = grad.feature_bias[j] + dacc[j];
            }
            for &f in features.iter() {
                touched.push(f);
                let row = &mut grad.feature_weights[f as usize * HIDDEN..(f as usize + 1) * HIDDEN];
                for (g, &d) in row.iter_mut().zip(&dacc) {
                    *g = *g + d;
                }
            }
        }
    }
    loss / n
}

/// Analytic gradient of the batch MSE.
pub fn batch_gradient<T: Float>(net: &Network<T>, samples: &[&TrainSample]) -> (T, Network<T>) {
    let mut grad = Network::zeros(net.input_dim);
    let mut touched = Vec::new();
    let loss = accumulate_gradient(net, samples, &mut grad, &mut touched);
    (loss, grad)
}

fn mse(net: &NnueModel, samples: &[TrainSample], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let sum: f64 = idx
        .iter()
        .map(|&i| {
            let (_, _, out) = forward_sample(net, &samples[i]);
            let e = (out - samples[i].target) as f64;
            e * e
        })
        .sum();
    sum / idx.len() as f64
}

/// Mini-batch gradient descent with momentum on the MSE between the network
/// output and the WDL targets. Returns the model with the best validation MSE.
/// Single-threaded and deterministic for a given seed.
pub fn train(samples: &[TrainSample], config: &TrainConfig) -> Result<TrainedModel, TrainError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((samples.len() as f64 * config.validation_fraction as f64).ceil() as usize).min(samples.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let val_idx: Vec<usize> = if val_idx.is_empty() { train_idx.to_vec() } else { val_idx.to_vec() };
    let mut train_idx = train_idx.to_vec();

    let mut net = NnueModel::random(config.input_dim, &mut rng);
    let mut velocity = NnueModel::zeros(config.input_dim);
    let mut grad = NnueModel::zeros(config.input_dim);
    let mut touched: Vec<u16> = Vec::new();
    let mut lr = config.learning_rate;
    let mu = config.momentum;

    let mut best = net.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        train_idx.shuffle(&mut rng);
        for (batch_no, chunk) in train_idx.chunks(config.batch_size).enumerate() {
            for &f in &touched {
                grad.feature_weights[f as usize * HIDDEN..(f as usize + 1) * HIDDEN].fill(0.0);
            }
            touched.clear();
            grad.feature_bias.fill(0.0);
            grad.output_weights.fill(0.0);
            grad.output_bias = 0.0;

            let batch: Vec<&TrainSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let loss = accumulate_gradient(&net, &batch, &mut grad, &mut touched);
            if !loss.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    batch: batch_no,
                    loss: loss as f64,
                });
            }
            step(&mut net.feature_weights, &mut velocity.feature_weights, &grad.feature_weights, lr, mu);
            step(&mut net.feature_bias, &mut velocity.feature_bias, &grad.feature_bias, lr, mu);
            step(&mut net.output_weights, &mut velocity.output_weights, &grad.output_weights, lr, mu);
            velocity.output_bias = mu * velocity.output_bias + grad.output_bias;
            net.output_bias -= lr * velocity.output_bias;
        }
        if !net.is_finite() {
            return Err(TrainError::Diverged {
                epoch,
                batch: 0,
                loss: f64::NAN,
            });
        }

        let train_mse = mse(&net, samples, &train_idx);
        let val_mse = mse(&net, samples, &val_idx);
        log::debug!("epoch {epoch}: train {train_mse:.6} val {val_mse:.6} lr {lr}");
        log.push(EpochLog {
            epoch,
            train_mse,
            val_mse,
            learning_rate: lr,
        });
        if val_mse < best_val {
            best_val = val_mse;
            best = net.clone();
            best_epoch = epoch;
        } else {
            lr *= config.lr_decay;
        }
    }

    Ok(TrainedModel {
        model: best,
        log,
        best_epoch,
    })
}

#[inline]
fn step(params: &mut [f32], velocity: &mut [f32], grad: &[f32], lr: f32, mu: f32) {
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = mu * *v + g;
        *p -= lr * *v;
    }
}
