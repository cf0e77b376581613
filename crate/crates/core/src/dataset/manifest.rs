use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    enumerate_pairs, DatasetError, MoleculeLibrary, PairConstraints, ReactionSample, Split, SplitProtocol,
    SyntheticLabeler,
};
use crate::molgraph::{Element, MolecularGraph};

/// Label mean and population standard deviation over the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub mean: f64,
    pub std: f64,
}

impl LabelStats {
    pub fn normalize(&self, label: f64) -> f64 {
        (label - self.mean) / self.std
    }

    pub fn denormalize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// A set of reaction samples with split assignments and label statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub samples: Vec<ReactionSample>,
    pub label_stats: Option<LabelStats>,
    /// Protocol of the last split; not persisted in the JSONL file.
    pub protocol: Option<SplitProtocol>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    alcohol: MolecularGraph,
    halide: MolecularGraph,
    label: f64,
    split: String,
    #[serde(default)]
    id: Option<usize>,
}

const UNASSIGNED: &str = "unassigned";

impl DatasetManifest {
    /// Validates sample ids (unique) and molecule roles.
    pub fn new(samples: Vec<ReactionSample>) -> Result<Self, DatasetError> {
        let mut ids = BTreeSet::new();
        for s in &samples {
            if !ids.insert(s.id) {
                return Err(DatasetError::DuplicateId(s.id));
            }
            s.validate()?;
            if !s.label.is_finite() {
                return Err(DatasetError::InvalidSample {
                    id: s.id,
                    reason: "label is not finite".into(),
                });
            }
        }
        Ok(Self {
            samples,
            label_stats: None,
            protocol: None,
        })
    }

    /// Pairs every valid alcohol with every valid acyl halide of `library`
    /// and labels each pair. Sample ids follow pair order.
    pub fn generate(library: &MoleculeLibrary, constraints: &PairConstraints, labeler: &SyntheticLabeler) -> Self {
        let alcohols = library.alcohol_graphs();
        let halides = library.acyl_halide_graphs();
        let pairing = enumerate_pairs(&alcohols, &halides, constraints);
        let samples = pairing
            .pairs
            .iter()
            .enumerate()
            .map(|(id, &(i, j))| {
                let (a, h) = (&alcohols[i], &halides[j]);
                ReactionSample::new(id, a.clone(), h.clone(), labeler.label(a, h))
            })
            .collect();
        Self {
            samples,
            label_stats: None,
            protocol: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples_in(&self, split: Split) -> Vec<&ReactionSample> {
        self.samples.iter().filter(|s| s.split == Some(split)).collect()
    }

    pub fn halogens_in(&self, split: Split) -> BTreeSet<Element> {
        self.samples_in(split)
            .iter()
            .filter_map(|s| s.acyl_halide.leaving_halogen())
            .collect()
    }

    /// Computes training-split label statistics and fills `label_norm` on
    /// every sample.
    pub fn normalize_labels(&mut self) -> Result<LabelStats, DatasetError> {
        let train: Vec<f64> = self.samples_in(Split::Train).iter().map(|s| s.label).collect();
        if train.is_empty() {
            return Err(DatasetError::NoTrainSamples);
        }
        let n = train.len() as f64;
        let mean = train.iter().sum::<f64>() / n;
        let std = (train.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n).sqrt();
        if std < 1e-12 {
            return Err(DatasetError::ConstantLabels(std));
        }
        let stats = LabelStats { mean, std };
        for s in &mut self.samples {
            s.label_norm = Some(stats.normalize(s.label));
        }
        self.label_stats = Some(stats);
        Ok(stats)
    }

    /// Treats every sample as training data; used where no split applies.
    pub fn all_train(&self) -> Self {
        let mut m = self.clone();
        for s in &mut m.samples {
            s.split = Some(Split::Train);
            s.label_norm = None;
        }
        m.label_stats = None;
        m.protocol = None;
        m
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let record = Record {
                alcohol: s.alcohol.clone(),
                halide: s.acyl_halide.clone(),
                label: s.label,
                split: s.split.map_or(UNASSIGNED, Split::name).to_owned(),
                id: Some(s.id),
            };
            out.push_str(&serde_json::to_string(&record).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses a JSONL manifest. Label statistics are recomputed when the
    /// file contains training samples.
    pub fn from_jsonl(text: &str) -> Result<Self, DatasetError> {
        let mut samples = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| DatasetError::Parse {
                location: format!("line {}", line_no + 1),
                message,
            };
            let r: Record = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            let split = match r.split.as_str() {
                UNASSIGNED => None,
                other => Some(other.parse::<Split>().map_err(parse_err)?),
            };
            let mut s = ReactionSample::new(r.id.unwrap_or(samples.len()), r.alcohol, r.halide, r.label);
            s.split = split;
            samples.push(s);
        }
        let mut m = Self::new(samples)?;
        if !m.samples_in(Split::Train).is_empty() {
            // constant training labels are reported when training starts
            let _ = m.normalize_labels();
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path)?;
        Self::from_jsonl(&text).map_err(|e| match e {
            DatasetError::Parse { location, message } => DatasetError::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }
}
