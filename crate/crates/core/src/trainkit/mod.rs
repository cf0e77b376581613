//! Training, evaluation, the two experiment drivers and residual-based
//! outlier removal.

mod experiment;
mod metrics;
mod model;
mod optim;
mod outliers;
mod regressor;
mod train;

pub use experiment::{
    experiment1_methods, experiment2_methods, run_experiment, run_experiment1, run_experiment2, ExperimentConfig,
    ExperimentResult, RunRecord,
};
pub use metrics::{Metrics, SRE_EPSILON};
pub use model::{fit, ModelSpec, TrainedModel};
pub use optim::{Adam, AdamConfig};
pub use outliers::{
    cross_validated_residuals, detect_outliers, median_mad, Outlier, OutlierIteration, OutlierPolicy, OutlierReport,
    NORMAL_MAD_SCALE,
};
pub use regressor::Regressor;
pub use train::{evaluate, predict_split, prepare_all, train, train_with, EpochLog, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("the manifest has no training samples")]
    NoTrainSamples,
    #[error("sample {id} has no normalized label; normalize labels after splitting")]
    MissingNormalizedLabels { id: usize },
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("{predictions} predictions for {targets} targets")]
    LengthMismatch { predictions: usize, targets: usize },
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("outlier threshold flags all {0} remaining samples")]
    AllFlagged(usize),
}
