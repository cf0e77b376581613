use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::dataset::DatasetError;
use crate::molgraph::GraphError;
use crate::mpnn::ModelError;
use crate::trainkit::TrainError;

/// Any failure surfaced by the public API.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier of the error class, used by the command line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Autodiff(_) => "autodiff",
            Error::Graph(_) => "graph",
            Error::Dataset(_) => "dataset",
            Error::Model(_) => "model",
            Error::Train(_) => "train",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
