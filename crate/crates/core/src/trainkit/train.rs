use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Adam, AdamConfig, Metrics, Regressor, TrainError};
use crate::autodiff::{Tape, Tensor};
use crate::dataset::{DatasetManifest, ReactionSample, Split};
use crate::error::Result;
use crate::hash::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop after this many epochs without a lower validation RMSE.
    pub patience: Option<usize>,
    /// Rescale gradients whose global L2 norm exceeds this value.
    pub clip_norm: Option<f64>,
    /// Stop once an epoch's mean training loss falls below this value.
    pub stop_below: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            epochs: 500,
            batch_size: 32,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            patience: Some(50),
            clip_norm: None,
            stop_below: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_owned()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return bad("Adam betas must lie in [0, 1) and epsilon must be positive");
        }
        if self.patience == Some(0) {
            return bad("patience must be at least 1");
        }
        if self.clip_norm.is_some_and(|c| c <= 0.0 || c.is_nan()) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Sample-weighted mean of the minibatch losses seen during the epoch.
    pub train_mse: f64,
    pub val: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub log: Vec<EpochLog>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_rmse: Option<f64>,
    pub stopped_early: bool,
}

fn normalized_target(s: &ReactionSample) -> Result<f64, TrainError> {
    s.label_norm.ok_or(TrainError::MissingNormalizedLabels { id: s.id })
}

/// Prepares the inputs of `samples` in parallel, keeping their order.
pub fn prepare_all<R: Regressor>(model: &R, samples: &[&ReactionSample]) -> Result<Vec<R::Input>> {
    samples.par_iter().map(|s| model.prepare(s)).collect()
}

/// Minimizes the MSE on normalized labels of the training split. The model
/// is left holding the parameters of the epoch with the lowest validation
/// RMSE (the last epoch when there is no validation split).
pub fn train<R: Regressor>(model: &mut R, manifest: &DatasetManifest, config: &TrainConfig) -> Result<TrainReport> {
    train_with(model, manifest, config, |_| {})
}

/// [`train`] with a callback invoked after every epoch.
pub fn train_with<R: Regressor>(
    model: &mut R,
    manifest: &DatasetManifest,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainReport> {
    config.validate()?;
    let train_samples = manifest.samples_in(Split::Train);
    if train_samples.is_empty() {
        return Err(TrainError::NoTrainSamples.into());
    }
    let val_samples = manifest.samples_in(Split::Val);
    let train_y: Vec<f64> = train_samples
        .iter()
        .map(|s| normalized_target(s))
        .collect::<Result<_, _>>()?;
    let val_y: Vec<f64> = val_samples
        .iter()
        .map(|s| normalized_target(s))
        .collect::<Result<_, _>>()?;

    model.fit_inputs(&train_samples)?;
    let train_x = prepare_all(model, &train_samples)?;
    let val_x = prepare_all(model, &val_samples)?;
    let val_refs: Vec<&R::Input> = val_x.iter().collect();

    let mut adam = Adam::new(config.adam(), model.store());
    let mut rng = rng_for(config.seed, "train/shuffle");
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut log = Vec::new();
    let mut best: Option<(f64, usize, Vec<Tensor>)> = None;
    let mut stopped_early = false;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let inputs: Vec<&R::Input> = chunk.iter().map(|&i| &train_x[i]).collect();
            let target = Tensor::new(chunk.len(), 1, chunk.iter().map(|&i| train_y[i]).collect())?;
            let mut tape = Tape::new();
            let bound = model.store().bind(&mut tape);
            let y = model.forward(&mut tape, &bound, &inputs)?;
            let loss = tape.mse(y, &target)?;
            let value = tape.value(loss).data()[0];
            if !value.is_finite() {
                return Err(TrainError::Diverged { epoch }.into());
            }
            loss_sum += value * chunk.len() as f64;
            let grads = tape.backward(loss)?;
            let mut grads = model.store().gradients(&bound, &grads);
            if let Some(max) = config.clip_norm {
                clip(&mut grads, max);
            }
            adam.update(model.store_mut(), &grads);
        }

        let val = if val_x.is_empty() {
            None
        } else {
            Some(Metrics::compute(&model.predict(&val_refs)?, &val_y)?)
        };
        let train_mse = loss_sum / train_x.len() as f64;
        let entry = EpochLog { epoch, train_mse, val };
        on_epoch(&entry);
        log.push(entry);
        let reached_target = config.stop_below.is_some_and(|t| train_mse < t);

        if let Some(v) = val {
            if !v.rmse.is_finite() {
                return Err(TrainError::Diverged { epoch }.into());
            }
            if best.as_ref().is_none_or(|(rmse, _, _)| v.rmse < *rmse) {
                best = Some((v.rmse, epoch, model.store().tensors().to_vec()));
            }
            let since = epoch - best.as_ref().map_or(epoch, |b| b.1);
            if config.patience.is_some_and(|p| since >= p) {
                stopped_early = true;
                break;
            }
        }
        if reached_target {
            stopped_early = true;
            break;
        }
    }

    let (best_epoch, best_val_rmse) = match best {
        Some((rmse, epoch, tensors)) => {
            model.store_mut().tensors_mut().clone_from_slice(&tensors);
            (epoch, Some(rmse))
        }
        None => (log.len().saturating_sub(1), None),
    };
    Ok(TrainReport {
        log,
        best_epoch,
        best_val_rmse,
        stopped_early,
    })
}

fn clip(grads: &mut [Tensor], max: f64) {
    let norm = grads
        .iter()
        .map(|g| g.data().iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if norm > max {
        let s = max / norm;
        for g in grads {
            g.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Predictions and normalized targets for one split.
pub fn predict_split<R: Regressor>(
    model: &R,
    manifest: &DatasetManifest,
    split: Split,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let samples = manifest.samples_in(split);
    let y: Vec<f64> = samples.iter().map(|s| normalized_target(s)).collect::<Result<_, _>>()?;
    let x = prepare_all(model, &samples)?;
    let pred = model.predict(&x.iter().collect::<Vec<_>>())?;
    Ok((pred, y))
}

/// Metrics on normalized labels of one split.
pub fn evaluate<R: Regressor>(model: &R, manifest: &DatasetManifest, split: Split) -> Result<Metrics> {
    let (pred, y) = predict_split(model, manifest, split)?;
    Ok(Metrics::compute(&pred, &y)?)
}
