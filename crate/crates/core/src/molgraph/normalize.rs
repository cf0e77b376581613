use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::autodiff::Tensor;

/// Columns whose training standard deviation falls below this are left untouched.
const MIN_STD: f64 = 1e-8;

/// Column-then-row normalization of initial node features.
///
/// Columns are z-scored with statistics fitted on training nodes (population
/// standard deviation); each row is then scaled to unit L2 norm. All-zero rows
/// stay zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    stats: Option<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ColumnStats {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_fitted(&self) -> bool {
        self.stats.is_some()
    }

    pub fn mean(&self) -> Option<&[f64]> {
        self.stats.as_ref().map(|s| s.mean.as_slice())
    }

    pub fn std(&self) -> Option<&[f64]> {
        self.stats.as_ref().map(|s| s.std.as_slice())
    }

    /// Fits column statistics over the rows of all given feature matrices.
    pub fn fit<'a>(&mut self, features: impl IntoIterator<Item = &'a Tensor>) -> Result<(), GraphError> {
        let mut sum: Vec<f64> = Vec::new();
        let mut sum_sq: Vec<f64> = Vec::new();
        let mut count = 0usize;
        let mut width = None;
        let mut rows_seen: Vec<&Tensor> = Vec::new();
        for x in features {
            let w = *width.get_or_insert(x.cols());
            if x.cols() != w {
                return Err(GraphError::FeatureWidth {
                    expected: w,
                    got: x.cols(),
                });
            }
            if sum.is_empty() {
                sum = vec![0.0; w];
                sum_sq = vec![0.0; w];
            }
            for r in 0..x.rows() {
                for (s, v) in sum.iter_mut().zip(x.row(r)) {
                    *s += v;
                }
            }
            count += x.rows();
            rows_seen.push(x);
        }
        if count == 0 {
            return Err(GraphError::NoTrainingNodes);
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        // second pass for the variance around the mean
        for x in rows_seen {
            for r in 0..x.rows() {
                for ((acc, v), m) in sum_sq.iter_mut().zip(x.row(r)).zip(&mean) {
                    *acc += (v - m) * (v - m);
                }
            }
        }
        let std = sum_sq.iter().map(|s| (s / count as f64).sqrt()).collect();
        self.stats = Some(ColumnStats { mean, std });
        Ok(())
    }

    pub fn apply(&self, x: &Tensor) -> Result<Tensor, GraphError> {
        let stats = self.stats.as_ref().ok_or(GraphError::NotFitted)?;
        if x.cols() != stats.mean.len() {
            return Err(GraphError::FeatureWidth {
                expected: stats.mean.len(),
                got: x.cols(),
            });
        }
        let mut out = x.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            for ((v, m), s) in row.iter_mut().zip(&stats.mean).zip(&stats.std) {
                if *s >= MIN_STD {
                    *v = (*v - m) / s;
                }
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        Ok(out)
    }
}
