use serde::{Deserialize, Serialize};

use super::{evaluate, train_with, EpochLog, Metrics, Regressor, TrainConfig, TrainReport};
use crate::baseline::{Mlp, MlpConfig};
use crate::dataset::{DatasetManifest, ReactionSample, Split};
use crate::error::Result;
use crate::mpnn::{ModelConfig, Mpnn};

/// Architecture and initialization of either model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Mpnn(ModelConfig),
    Mlp(MlpConfig),
}

impl ModelSpec {
    /// Name used in result tables, e.g. `MPNN GN+Norm` or `MLP`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Mpnn(c) => format!("MPNN {}", c.label()),
            ModelSpec::Mlp(_) => "MLP".into(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelSpec::Mpnn(c) => c.seed,
            ModelSpec::Mlp(c) => c.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ModelSpec::Mpnn(c) => c.seed = seed,
            ModelSpec::Mlp(c) => c.seed = seed,
        }
        self
    }

    pub fn build(&self) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::Mpnn(c) => TrainedModel::Mpnn(Mpnn::new(c.clone())?),
            ModelSpec::Mlp(c) => TrainedModel::Mlp(Mlp::new(c.clone())?),
        })
    }
}

/// A model of either family, as stored in checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Mpnn(Mpnn),
    Mlp(Mlp),
}

impl TrainedModel {
    pub fn label(&self) -> String {
        match self {
            TrainedModel::Mpnn(m) => m.label(),
            TrainedModel::Mlp(m) => m.label(),
        }
    }

    pub fn train(
        &mut self,
        manifest: &DatasetManifest,
        config: &TrainConfig,
        on_epoch: impl FnMut(&EpochLog),
    ) -> Result<TrainReport> {
        match self {
            TrainedModel::Mpnn(m) => train_with(m, manifest, config, on_epoch),
            TrainedModel::Mlp(m) => train_with(m, manifest, config, on_epoch),
        }
    }

    /// Normalized-unit predictions.
    pub fn predict_samples(&self, samples: &[&ReactionSample]) -> Result<Vec<f64>> {
        fn run<R: Regressor>(m: &R, samples: &[&ReactionSample]) -> Result<Vec<f64>> {
            let x = super::prepare_all(m, samples)?;
            m.predict(&x.iter().collect::<Vec<_>>())
        }
        match self {
            TrainedModel::Mpnn(m) => run(m, samples),
            TrainedModel::Mlp(m) => run(m, samples),
        }
    }

    pub fn evaluate(&self, manifest: &DatasetManifest, split: Split) -> Result<Metrics> {
        match self {
            TrainedModel::Mpnn(m) => evaluate(m, manifest, split),
            TrainedModel::Mlp(m) => evaluate(m, manifest, split),
        }
    }
}

/// Builds the model described by `spec` and trains it.
pub fn fit(spec: &ModelSpec, manifest: &DatasetManifest, config: &TrainConfig) -> Result<(TrainedModel, TrainReport)> {
    let mut model = spec.build()?;
    let report = model.train(manifest, config, |_| {})?;
    Ok((model, report))
}
