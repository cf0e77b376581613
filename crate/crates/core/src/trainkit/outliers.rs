use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, ModelSpec, TrainConfig, TrainError};
use crate::dataset::{DatasetManifest, ReactionSample, Split};
use crate::error::Result;
use crate::hash::{derive_seed, rng_for};

/// `1 / Φ⁻¹(3/4)`: the raw MAD times this estimates σ for normal data.
pub const NORMAL_MAD_SCALE: f64 = 1.4826;

/// How residuals are scored and thresholded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierPolicy {
    /// Flag residuals above `median + k · mad_scale · MAD`.
    pub k: f64,
    /// Multiplier turning the MAD into a spread estimate. The default,
    /// 1.4826, makes it match the standard deviation for normal data; 1
    /// uses the raw MAD.
    pub mad_scale: f64,
    /// Residuals are scored out of fold with this many folds; 1 scores every
    /// sample with a model trained on all of them.
    pub folds: usize,
    /// Share of each training pool held out for early stopping.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        Self {
            k: 6.0,
            mad_scale: NORMAL_MAD_SCALE,
            folds: 5,
            val_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub id: usize,
    /// Prediction minus label, in label units.
    pub residual: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierIteration {
    pub iteration: usize,
    pub samples: usize,
    pub median: f64,
    pub mad: f64,
    pub threshold: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    /// Input manifest without the flagged samples; splits and label
    /// statistics are cleared.
    pub clean: DatasetManifest,
    pub outliers: Vec<Outlier>,
    pub iterations: Vec<OutlierIteration>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// `(median, MAD)` of `values`.
pub fn median_mad(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let med = median(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    (med, median(&dev))
}

/// Residuals `ŷ − y` in label units for every sample, each predicted by a
/// model that did not train on it (unless `folds` is 1).
pub fn cross_validated_residuals(
    samples: &[ReactionSample],
    spec: &ModelSpec,
    train: &TrainConfig,
    policy: &OutlierPolicy,
    round: usize,
) -> Result<Vec<f64>> {
    let n = samples.len();
    let folds = policy.folds.max(1).min(n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(policy.seed, &format!("outliers/folds/{round}")));
    let mut fold_of = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        fold_of[i] = rank % folds;
    }

    let per_fold: Vec<Vec<(usize, f64)>> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(policy.seed, &format!("outliers/{round}/{k}"));
            let mut pool: Vec<usize> = (0..n).filter(|&i| folds == 1 || fold_of[i] != k).collect();
            pool.shuffle(&mut rng_for(seed, "val"));
            let n_val = ((pool.len() as f64) * policy.val_fraction).floor() as usize;
            let mut m = DatasetManifest {
                samples: samples.to_vec(),
                ..DatasetManifest::default()
            };
            for s in &mut m.samples {
                s.split = Some(Split::Test);
            }
            for (rank, &i) in pool.iter().enumerate() {
                m.samples[i].split = Some(if rank < n_val { Split::Val } else { Split::Train });
            }
            let stats = m.normalize_labels()?;
            let spec = spec.clone().with_seed(derive_seed(seed, "model"));
            let config = TrainConfig {
                seed: derive_seed(seed, "train"),
                ..train.clone()
            };
            let (model, _) = fit(&spec, &m, &config)?;
            let scored: Vec<usize> = (0..n).filter(|&i| folds == 1 || fold_of[i] == k).collect();
            let refs: Vec<&ReactionSample> = scored.iter().map(|&i| &samples[i]).collect();
            let pred = model.predict_samples(&refs)?;
            Ok(scored
                .iter()
                .zip(pred)
                .map(|(&i, p)| (i, stats.denormalize(p) - samples[i].label))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut residuals = vec![0.0; n];
    for (i, r) in per_fold.into_iter().flatten() {
        residuals[i] = r;
    }
    Ok(residuals)
}

/// Repeatedly scores residuals, removes samples whose absolute residual
/// exceeds `median + k · mad_scale · MAD`, and retrains, until nothing new is flagged or
/// `max_iters` rounds have run.
pub fn detect_outliers(
    manifest: &DatasetManifest,
    spec: &ModelSpec,
    train: &TrainConfig,
    policy: &OutlierPolicy,
    max_iters: usize,
) -> Result<OutlierReport> {
    let mut remaining: Vec<ReactionSample> = manifest.samples.clone();
    for s in &mut remaining {
        s.split = None;
        s.label_norm = None;
    }
    let mut outliers = Vec::new();
    let mut iterations = Vec::new();

    for iteration in 0..max_iters {
        let residuals = cross_validated_residuals(&remaining, spec, train, policy, iteration)?;
        let abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        let (med, mad) = median_mad(&abs);
        let threshold = med + policy.k * policy.mad_scale * mad;
        let flagged: Vec<usize> = (0..remaining.len()).filter(|&i| abs[i] > threshold).collect();
        iterations.push(OutlierIteration {
            iteration,
            samples: remaining.len(),
            median: med,
            mad,
            threshold,
            flagged: flagged.len(),
        });
        if flagged.len() == remaining.len() {
            return Err(TrainError::AllFlagged(remaining.len()).into());
        }
        if flagged.is_empty() {
            break;
        }
        outliers.extend(flagged.iter().map(|&i| Outlier {
            id: remaining[i].id,
            residual: residuals[i],
            iteration,
        }));
        let mut keep = vec![true; remaining.len()];
        for &i in &flagged {
            keep[i] = false;
        }
        let mut it = keep.iter();
        remaining.retain(|_| *it.next().expect("one flag per sample"));
    }

    Ok(OutlierReport {
        clean: DatasetManifest {
            samples: remaining,
            label_stats: None,
            protocol: None,
        },
        outliers,
        iterations,
    })
}
