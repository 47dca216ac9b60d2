//! Fully connected network with rectifier hidden layers and a single logistic
//! output giving P(Fail), trained on binary cross-entropy with momentum SGD.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Standardizer};
use crate::cohort::Outcome;
use crate::error::{Error, Result};

/// Probabilities are kept this far from 0 and 1.
const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![32, 16, 8],
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 200,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("momentum must be in [0, 1)".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs × inputs`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseLayer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.biases.iter().enumerate().map(|(o, b)| {
            let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
        }));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy from a logit, without forming the probability.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

impl MlpModel {
    fn widths(input: usize, hidden: &[usize]) -> Vec<usize> {
        let mut w = vec![input];
        w.extend_from_slice(hidden);
        w.push(1);
        w
    }

    pub fn zeros(input: usize, hidden: &[usize]) -> Self {
        let w = Self::widths(input, hidden);
        MlpModel {
            layers: w.windows(2).map(|p| DenseLayer::zeros(p[0], p[1])).collect(),
        }
    }

    /// He-normal weights, zero biases.
    pub fn random(input: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut m = Self::zeros(input, hidden);
        for layer in &mut m.layers {
            let normal = Normal::new(0.0, (2.0 / layer.inputs as f64).sqrt()).expect("finite std");
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
        }
        m
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
    }

    /// Activations per layer (input first); the last entry holds the logit.
    fn activations(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(row.to_vec());
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(l.outputs);
            l.forward(&acts[i], &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    pub fn logit(&self, row: &[f64]) -> f64 {
        self.activations(row).last().expect("output layer")[0]
    }

    /// P(Fail), strictly inside (0, 1).
    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit(row)).clamp(PROB_EPS, 1.0 - PROB_EPS)
    }

    /// Mean binary cross-entropy over the rows.
    pub fn loss(&self, rows: &[Vec<f64>], targets: &[f64]) -> f64 {
        rows.iter()
            .zip(targets)
            .map(|(r, &y)| bce_from_logit(self.logit(r), y))
            .sum::<f64>()
            / rows.len() as f64
    }

    /// Mean loss and its gradient in [`params`](Self::params) layout.
    pub fn loss_and_gradient(&self, rows: &[Vec<f64>], targets: &[f64]) -> (f64, Vec<f64>) {
        let mut grads: Vec<DenseLayer> = self
            .layers
            .iter()
            .map(|l| DenseLayer::zeros(l.inputs, l.outputs))
            .collect();
        let mut loss = 0.0;
        for (row, &y) in rows.iter().zip(targets) {
            let acts = self.activations(row);
            let z = acts.last().unwrap()[0];
            loss += bce_from_logit(z, y);
            let mut delta = vec![sigmoid(z) - y];
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &acts[li];
                let g = &mut grads[li];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let gw = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    gw.iter_mut().zip(input).for_each(|(gw, x)| *gw += d * x);
                }
                if li == 0 {
                    break;
                }
                // Back through the weights, then the rectifier of layer li-1.
                let mut prev = vec![0.0; layer.inputs];
                for (o, d) in delta.iter().enumerate() {
                    let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    prev.iter_mut().zip(w).for_each(|(p, w)| *p += d * w);
                }
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        let n = rows.len() as f64;
        let mut flat = Vec::with_capacity(self.param_count());
        for g in grads {
            flat.extend(g.weights.iter().map(|v| v / n));
            flat.extend(g.biases.iter().map(|v| v / n));
        }
        (loss / n, flat)
    }
}

/// Trains on already standardized features.
pub fn mlp_fit(train: &Dataset, cfg: &MlpConfig) -> Result<MlpModel> {
    cfg.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::Dataset("cannot train on an empty dataset".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::random(train.n_features(), &cfg.hidden, &mut rng);
    let targets = train.targets();
    let mut params = model.params();
    let mut velocity = vec![0.0; params.len()];
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut batch_rows = Vec::with_capacity(cfg.batch_size);
    let mut batch_y = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch_rows.clear();
            batch_y.clear();
            for &i in chunk {
                batch_rows.push(train.rows()[i].clone());
                batch_y.push(targets[i]);
            }
            let (loss, grad) = model.loss_and_gradient(&batch_rows, &batch_y);
            epoch_loss += loss * chunk.len() as f64;
            for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *p += *v;
            }
            model.set_params(&params);
        }
        if !epoch_loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
        }
    }
    Ok(model)
}

pub fn mlp_predict(model: &MlpModel, rows: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Outcome>)> {
    if let Some(r) = rows.iter().find(|r| r.len() != model.input_width()) {
        return Err(Error::Dataset(format!(
            "row has {} columns, model expects {}",
            r.len(),
            model.input_width()
        )));
    }
    let probs: Vec<f64> = rows.iter().map(|r| model.probability(r)).collect();
    let labels = probs
        .iter()
        .map(|&p| if p >= 0.5 { Outcome::Fail } else { Outcome::Pass })
        .collect();
    Ok((probs, labels))
}

/// An MLP bundled with the standardization fitted on its training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpClassifier {
    pub standardizer: Standardizer,
    pub model: MlpModel,
}

impl MlpClassifier {
    pub fn fit(train: &Dataset, cfg: &MlpConfig) -> Result<Self> {
        let standardizer = Standardizer::fit(train);
        let model = mlp_fit(&standardizer.transform(train), cfg)?;
        Ok(MlpClassifier {
            standardizer,
            model,
        })
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<Outcome>> {
        let rows: Vec<Vec<f64>> = self.standardizer.transform(ds).rows().to_vec();
        Ok(mlp_predict(&self.model, &rows)?.1)
    }
}
