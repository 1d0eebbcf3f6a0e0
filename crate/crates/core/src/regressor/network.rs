//! A fully connected `D → H → 2` regressor with a tanh hidden layer and
//! linear depth/angle heads, trained by mini-batch Adam on mean squared
//! error in standardized target units.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

pub const OUTPUTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub hidden_width: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            hidden_width: 64,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 64,
            seed: 7,
        }
    }
}

/// Raw weights, flattened as `[w1 (H×D) | b1 (H) | w2 (2×H) | b2 (2)]`,
/// all row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub input_dim: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

/// Scratch buffers for one forward/backward pass.
struct Scratch {
    hidden: Vec<f64>,
    out: [f64; OUTPUTS],
}

impl Network {
    pub fn param_count(input_dim: usize, hidden: usize) -> usize {
        hidden * input_dim + hidden + OUTPUTS * hidden + OUTPUTS
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut params = vec![0.0; Self::param_count(input_dim, hidden)];
        let a1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        let a2 = (6.0 / (hidden + OUTPUTS) as f64).sqrt();
        let (w1_end, w2_start) = (hidden * input_dim, hidden * input_dim + hidden);
        for w in &mut params[..w1_end] {
            *w = rng.random_range(-a1..a1);
        }
        for w in &mut params[w2_start..w2_start + OUTPUTS * hidden] {
            *w = rng.random_range(-a2..a2);
        }
        Self {
            input_dim,
            hidden,
            params,
        }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.input_dim;
        let w2 = b1 + self.hidden;
        let b2 = w2 + OUTPUTS * self.hidden;
        (b1, w2, b2)
    }

    fn forward_into(&self, x: &[f64], s: &mut Scratch) {
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        for h in 0..self.hidden {
            let row = &p[h * self.input_dim..(h + 1) * self.input_dim];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + p[b1 + h];
            s.hidden[h] = z.tanh();
        }
        for k in 0..OUTPUTS {
            let row = &p[w2 + k * self.hidden..w2 + (k + 1) * self.hidden];
            s.out[k] = row.iter().zip(&s.hidden).map(|(w, v)| w * v).sum::<f64>() + p[b2 + k];
        }
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            hidden: vec![0.0; self.hidden],
            out: [0.0; OUTPUTS],
        }
    }

    /// Output in standardized units for an already standardized input.
    pub fn forward(&self, x: &[f64]) -> [f64; OUTPUTS] {
        let mut s = self.scratch();
        self.forward_into(x, &mut s);
        s.out
    }

    /// `1/(2B) Σ_i Σ_k (y_ik - t_ik)²` over the given rows.
    pub fn loss(&self, xs: &[Vec<f64>], ts: &[[f64; OUTPUTS]], rows: &[usize]) -> f64 {
        let mut s = self.scratch();
        let mut total = 0.0;
        for &i in rows {
            self.forward_into(&xs[i], &mut s);
            for k in 0..OUTPUTS {
                let e = s.out[k] - ts[i][k];
                total += e * e;
            }
        }
        total / (OUTPUTS * rows.len()) as f64
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_gradient(
        &self,
        xs: &[Vec<f64>],
        ts: &[[f64; OUTPUTS]],
        rows: &[usize],
        grad: &mut [f64],
    ) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (b1, w2, b2) = self.offsets();
        let scale = 1.0 / (OUTPUTS * rows.len()) as f64;
        let mut s = self.scratch();
        let mut dh = vec![0.0; self.hidden];
        let mut total = 0.0;
        for &i in rows {
            let x = &xs[i];
            self.forward_into(x, &mut s);
            let mut dout = [0.0; OUTPUTS];
            for k in 0..OUTPUTS {
                let e = s.out[k] - ts[i][k];
                total += e * e;
                dout[k] = 2.0 * e * scale;
            }
            for (h, d) in dh.iter_mut().enumerate() {
                let mut back = 0.0;
                for k in 0..OUTPUTS {
                    grad[w2 + k * self.hidden + h] += dout[k] * s.hidden[h];
                    back += dout[k] * self.params[w2 + k * self.hidden + h];
                }
                *d = back * (1.0 - s.hidden[h] * s.hidden[h]);
            }
            for k in 0..OUTPUTS {
                grad[b2 + k] += dout[k];
            }
            for (h, &d) in dh.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[h * self.input_dim..(h + 1) * self.input_dim];
                for (g, v) in row.iter_mut().zip(x) {
                    *g += d * v;
                }
                grad[b1 + h] += d;
            }
        }
        total * scale
    }
}

/// Per-channel affine standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Channels with zero spread get a unit std so they pass through centred.
    pub fn fit<'a, I>(rows: I, dim: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]> + Clone,
    {
        let mut mean = vec![0.0; dim];
        let mut n = 0usize;
        for r in rows.clone() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
            n += 1;
        }
        let n = n.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// A trained predictor: network plus input and target standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub network: Network,
    pub features: Standardizer,
    pub targets: Standardizer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub depth: f64,
    pub angle: f64,
}

/// Anything that maps a flattened feature vector to `(depth, angle)`.
pub trait Predictor {
    fn predict(&self, features: &[f64]) -> Result<Prediction>;
}

impl RegressorModel {
    pub fn input_dim(&self) -> usize {
        self.network.input_dim
    }
}

impl Predictor for RegressorModel {
    fn predict(&self, features: &[f64]) -> Result<Prediction> {
        predict(self, features)
    }
}

/// One forward pass, returning depth in mm and angle in degrees.
pub fn predict(model: &RegressorModel, features: &[f64]) -> Result<Prediction> {
    if features.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: features.len(),
        });
    }
    let z = model.features.apply(features);
    let y = model.network.forward(&z);
    Ok(Prediction {
        depth: y[0] * model.targets.std[0] + model.targets.mean[0],
        angle: y[1] * model.targets.std[1] + model.targets.mean[1],
    })
}

/// Training trace returned alongside the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Full-set loss before the first update and after every epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainReport {
    pub fn initial_loss(&self) -> f64 {
        self.epoch_losses[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.epoch_losses.last().unwrap()
    }
}

pub fn train(train_set: &Dataset, hyper: &Hyper) -> Result<RegressorModel> {
    train_with_report(train_set, hyper).map(|(m, _)| m)
}

pub fn train_with_report(train_set: &Dataset, hyper: &Hyper) -> Result<(RegressorModel, TrainReport)> {
    let dim = train_set.feature_len().ok_or(Error::EmptyDataset)?;
    if hyper.hidden_width == 0 || hyper.batch_size == 0 {
        return Err(Error::InvalidArgument("hidden width and batch size must be positive".into()));
    }
    if let Some(bad) = train_set.samples.iter().find(|s| s.features.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.features.len(),
        });
    }
    let features = Standardizer::fit(train_set.samples.iter().map(|s| s.features.as_slice()), dim);
    let labels: Vec<[f64; 2]> = train_set.samples.iter().map(|s| [s.depth, s.angle]).collect();
    let targets = Standardizer::fit(labels.iter().map(|l| l.as_slice()), OUTPUTS);

    let xs: Vec<Vec<f64>> = train_set.samples.iter().map(|s| features.apply(&s.features)).collect();
    let ts: Vec<[f64; OUTPUTS]> = labels
        .iter()
        .map(|l| {
            let z = targets.apply(l);
            [z[0], z[1]]
        })
        .collect();

    let mut r = rng::stream(hyper.seed, 2);
    let mut net = Network::init(dim, hyper.hidden_width, &mut r);
    let mut adam = Adam::new(net.params.len(), hyper.learning_rate);
    let mut grad = vec![0.0; net.params.len()];
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut epoch_losses = vec![net.loss(&xs, &ts, &order)];

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut r);
        for batch in order.chunks(hyper.batch_size) {
            let l = net.loss_and_gradient(&xs, &ts, batch, &mut grad);
            if !l.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            adam.step(&mut net.params, &grad);
        }
        let l = net.loss(&xs, &ts, &order);
        if !l.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        epoch_losses.push(l);
    }
    Ok((
        RegressorModel {
            network: net,
            features,
            targets,
        },
        TrainReport { epoch_losses },
    ))
}

struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}
