use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, Metrics, ModelSpec, TrainConfig};
use crate::baseline::MlpConfig;
use crate::dataset::{split, DatasetManifest, Split, SplitFractions, SplitProtocol};
use crate::error::Result;
use crate::hash::derive_seed;
use crate::molgraph::JoinStrategy;
use crate::mpnn::{ModelConfig, Readout};

/// Settings shared by every method of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// One split and one training run per method for each seed.
    pub seeds: Vec<u64>,
    pub fractions: SplitFractions,
    pub train: TrainConfig,
    pub methods: Vec<ModelSpec>,
}

/// DG, FC and GN networks built from `template`, followed by the MLP.
pub fn experiment1_methods(template: &ModelConfig, mlp: &MlpConfig) -> Vec<ModelSpec> {
    let mut methods: Vec<ModelSpec> = [
        JoinStrategy::Disjoint,
        JoinStrategy::FullyConnected,
        JoinStrategy::GlobalNode,
    ]
    .into_iter()
    .map(|strategy| {
        ModelSpec::Mpnn(ModelConfig {
            strategy,
            readout: Readout::GatedSum,
            ..template.clone()
        })
    })
    .collect();
    methods.push(ModelSpec::Mlp(mlp.clone()));
    methods
}

/// GN, GN+Norm, GN+Norm+CR and GN+Norm+GR built from `template`, followed by
/// the MLP.
pub fn experiment2_methods(template: &ModelConfig, mlp: &MlpConfig) -> Vec<ModelSpec> {
    let variant = |normalize, readout| {
        ModelSpec::Mpnn(ModelConfig {
            strategy: JoinStrategy::GlobalNode,
            normalize,
            readout,
            ..template.clone()
        })
    };
    vec![
        variant(false, Readout::GatedSum),
        variant(true, Readout::GatedSum),
        variant(true, Readout::Concat),
        variant(true, Readout::GlobalNode),
        ModelSpec::Mlp(mlp.clone()),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub seed: u64,
    pub split: Split,
    pub metrics: Metrics,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub protocol: SplitProtocol,
    /// Method labels in table order.
    pub methods: Vec<String>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentResult {
    /// Metrics averaged over seeds.
    pub fn mean(&self, method: &str, split: Split) -> Option<Metrics> {
        let runs: Vec<Metrics> = self
            .runs
            .iter()
            .filter(|r| r.method == method && r.split == split)
            .map(|r| r.metrics)
            .collect();
        Metrics::mean(&runs)
    }

    /// `method,split,r2,rmse,sre,mae` with seed-averaged values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,split,r2,rmse,sre,mae\n");
        for method in &self.methods {
            for split in Split::ALL {
                if let Some(m) = self.mean(method, split) {
                    writeln!(
                        out,
                        "{method},{split},{:.6e},{:.6e},{:.6e},{:.6e}",
                        m.r2, m.rmse, m.sre, m.mae
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    /// One row per seed, method and split.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("method,seed,split,r2,rmse,sre,mae,epochs\n");
        for r in &self.runs {
            let m = r.metrics;
            writeln!(
                out,
                "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{}",
                r.method, r.seed, r.split, m.r2, m.rmse, m.sre, m.mae, r.epochs
            )
            .unwrap();
        }
        out
    }
}

/// Splits `manifest` with `protocol` once per seed, trains every method on
/// each split and evaluates it on all three splits.
///
/// Model and training seeds are derived from the split seed and the method
/// label, so runs are independent of scheduling and of which other methods
/// are included.
pub fn run_experiment(
    manifest: &DatasetManifest,
    protocol: SplitProtocol,
    config: &ExperimentConfig,
) -> Result<ExperimentResult> {
    let splits: Vec<DatasetManifest> = config
        .seeds
        .iter()
        .map(|&seed| {
            let mut m = split(manifest, protocol, config.fractions, seed)?;
            m.normalize_labels()?;
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, &ModelSpec)> = (0..config.seeds.len())
        .flat_map(|i| config.methods.iter().map(move |m| (i, m)))
        .collect();
    let runs: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(i, spec)| {
            let seed = config.seeds[i];
            let label = spec.label();
            let spec = spec.clone().with_seed(derive_seed(seed, &format!("model/{label}")));
            let train = TrainConfig {
                seed: derive_seed(seed, &format!("train/{label}")),
                ..config.train.clone()
            };
            let (model, report) = fit(&spec, &splits[i], &train)?;
            Split::ALL
                .into_iter()
                .filter(|&s| !splits[i].samples_in(s).is_empty())
                .map(|s| {
                    Ok(RunRecord {
                        method: label.clone(),
                        seed,
                        split: s,
                        metrics: model.evaluate(&splits[i], s)?,
                        epochs: report.log.len(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(ExperimentResult {
        protocol,
        methods: config.methods.iter().map(ModelSpec::label).collect(),
        runs: runs.concat(),
    })
}

/// Interpolation benchmark on random splits.
pub fn run_experiment1(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment(manifest, SplitProtocol::Random, config)
}

/// Generalization benchmark on leave-alcohol-out splits.
pub fn run_experiment2(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment(manifest, SplitProtocol::LeaveAlcoholOut, config)
}
