//! Reaction samples: combinatorial pairing of alcohols with acyl halides,
//! synthetic reaction-energy labels, split protocols, label normalization and
//! the JSONL manifest format.

mod library;
mod manifest;
mod pairing;
mod split;
mod synthetic;

pub use library::MoleculeLibrary;
pub use manifest::{DatasetManifest, LabelStats};
pub use pairing::{check_acyl_halide, check_alcohol, enumerate_pairs, PairConstraints, Pairing, Rejection};
pub use split::{split, SplitFractions, SplitProtocol};
pub use synthetic::{MoleculeDescriptors, SyntheticLabeler};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{join, JoinStrategy, JoinedGraph, MolecularGraph};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("molecule {0:?} has no role")]
    MissingRole(String),
    #[error("sample {id}: {reason}")]
    InvalidSample { id: usize, reason: String },
    #[error("duplicate sample id {0}")]
    DuplicateId(usize),
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    Fractions([f64; 3]),
    #[error("leave-alcohol-out split infeasible: {0}")]
    InfeasibleSplit(String),
    #[error("no training samples to compute label statistics")]
    NoTrainSamples,
    #[error("training labels have zero spread (std {0:e})")]
    ConstantLabels(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// One labeled reactant pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSample {
    pub id: usize,
    pub alcohol: MolecularGraph,
    pub acyl_halide: MolecularGraph,
    /// Reaction energy in kcal/mol.
    pub label: f64,
    /// Label z-scored with training statistics, once computed.
    pub label_norm: Option<f64>,
    pub split: Option<Split>,
}

impl ReactionSample {
    pub fn new(id: usize, alcohol: MolecularGraph, acyl_halide: MolecularGraph, label: f64) -> Self {
        Self {
            id,
            alcohol,
            acyl_halide,
            label,
            label_norm: None,
            split: None,
        }
    }

    /// Joined network input, alcohol first.
    pub fn join(&self, strategy: JoinStrategy) -> JoinedGraph {
        join(&self.alcohol, &self.acyl_halide, strategy)
    }

    /// Checks the role patterns of both molecules.
    pub fn validate(&self) -> Result<(), DatasetError> {
        check_alcohol(&self.alcohol)
            .and_then(|_| check_acyl_halide(&self.acyl_halide))
            .map_err(|reason| DatasetError::InvalidSample { id: self.id, reason })
    }
}
