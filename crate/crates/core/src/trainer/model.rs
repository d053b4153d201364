use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::featurize::SparseVector;

/// Multiclass softmax regression over sparse features.
///
/// `weights` is row-major, one row of `feature_count` entries per label.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    label_count: usize,
    feature_count: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
    pub(crate) step_counter: u64,
}

/// One training example.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub features: &'a SparseVector,
    pub label: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub batch_size: usize,
}

impl From<&crate::config::TrainerConfig> for TrainParams {
    fn from(c: &crate::config::TrainerConfig) -> Self {
        Self {
            learning_rate: c.learning_rate,
            epochs: c.epochs_per_step,
            l2_penalty: c.l2_penalty,
            batch_size: c.batch_size,
        }
    }
}

/// Gradient of the regularized objective, same layout as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(label_count: usize, feature_count: usize) -> Self {
        Self {
            label_count,
            feature_count,
            weights: vec![0.0; label_count * feature_count],
            bias: vec![0.0; label_count],
            step_counter: 0,
        }
    }

    pub(crate) fn from_parts(
        label_count: usize,
        feature_count: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        step_counter: u64,
    ) -> Result<Self> {
        if weights.len() != label_count * feature_count || bias.len() != label_count {
            return Err(Error::DimensionMismatch(format!(
                "{} weights / {} biases for {label_count} labels x {feature_count} features",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self {
            label_count,
            feature_count,
            weights,
            bias,
            step_counter,
        })
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    fn row(&self, label: usize) -> &[f64] {
        &self.weights[label * self.feature_count..(label + 1) * self.feature_count]
    }

    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.label_count)
            .map(|l| self.bias[l] + x.dot_dense(self.row(l)))
            .collect()
    }

    /// Softmax of the linear scores.
    pub fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        softmax(&self.scores(x))
    }

    /// Index of the highest score; ties go to the lowest label index.
    pub fn predict(&self, x: &SparseVector) -> u32 {
        argmax(&self.scores(x)) as u32
    }

    fn check_sample(&self, s: &Sample<'_>) -> Result<()> {
        if s.label as usize >= self.label_count {
            return Err(Error::DimensionMismatch(format!(
                "label {} with {} labels",
                s.label, self.label_count
            )));
        }
        if let Some(i) = s.features.max_index() {
            if i as usize >= self.feature_count {
                return Err(Error::DimensionMismatch(format!(
                    "feature index {i} with {} features",
                    self.feature_count
                )));
            }
        }
        Ok(())
    }

    /// Mean cross-entropy over `batch` plus `l2/2 * ||W||^2` (bias unpenalized).
    pub fn objective(&self, batch: &[Sample<'_>], l2: f64) -> f64 {
        let ce: f64 = batch
            .iter()
            .map(|s| {
                let scores = self.scores(s.features);
                log_sum_exp(&scores) - scores[s.label as usize]
            })
            .sum::<f64>()
            / batch.len() as f64;
        ce + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Writes the gradient of [`objective`](Self::objective) into `grad` and
    /// returns the objective value.
    pub fn batch_gradient(&self, batch: &[Sample<'_>], l2: f64, grad: &mut Gradient) -> f64 {
        let f = self.feature_count;
        for (g, w) in grad.weights.iter_mut().zip(&self.weights) {
            *g = l2 * w;
        }
        grad.bias.iter_mut().for_each(|g| *g = 0.0);
        let scale = 1.0 / batch.len() as f64;
        let mut ce = 0.0;
        for s in batch {
            let scores = self.scores(s.features);
            let lse = log_sum_exp(&scores);
            ce += lse - scores[s.label as usize];
            for (l, &score) in scores.iter().enumerate() {
                let p = (score - lse).exp();
                let delta = (p - if l == s.label as usize { 1.0 } else { 0.0 }) * scale;
                grad.bias[l] += delta;
                let row = &mut grad.weights[l * f..(l + 1) * f];
                for &(i, x) in s.features.entries() {
                    row[i as usize] += delta * x;
                }
            }
        }
        ce * scale + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn empty_gradient(&self) -> Gradient {
        Gradient {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// Runs `params.epochs` epochs of shuffled minibatch SGD over `samples`,
/// starting from `model`'s weights, and bumps the step counter.
///
/// The shuffle order is drawn from `rng`; running two one-epoch calls with a
/// continued stream gives the same weights as a single two-epoch call.
pub fn train_online(
    model: &LinearModel,
    samples: &[Sample<'_>],
    params: &TrainParams,
    rng: &mut ChaCha8Rng,
) -> Result<LinearModel> {
    if samples.is_empty() {
        return Err(Error::Corpus("cannot train on zero labeled documents".into()));
    }
    for s in samples {
        model.check_sample(s)?;
    }
    let mut next = model.clone();
    let mut grad = next.empty_gradient();
    let mut order: Vec<usize> = Vec::with_capacity(samples.len());
    let mut batch: Vec<Sample<'_>> = Vec::with_capacity(params.batch_size);
    let mut batch_no = 0usize;
    for _ in 0..params.epochs {
        order.clear();
        order.extend(0..samples.len());
        order.shuffle(rng);
        for chunk in order.chunks(params.batch_size.max(1)) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| samples[i]));
            let loss = next.batch_gradient(&batch, params.l2_penalty, &mut grad);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    step: model.step_counter,
                    batch: batch_no,
                });
            }
            for (w, g) in next.weights.iter_mut().zip(&grad.weights) {
                *w -= params.learning_rate * g;
            }
            for (b, g) in next.bias.iter_mut().zip(&grad.bias) {
                *b -= params.learning_rate * g;
            }
            batch_no += 1;
        }
    }
    if !next.is_finite() {
        return Err(Error::NonFiniteLoss {
            step: model.step_counter,
            batch: batch_no,
        });
    }
    next.step_counter += 1;
    Ok(next)
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
