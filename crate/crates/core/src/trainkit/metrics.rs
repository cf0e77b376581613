use serde::{Deserialize, Serialize};

use super::TrainError;

/// Guard added to `|y|` in the squared relative error.
pub const SRE_EPSILON: f64 = 1e-8;

/// Regression metrics on normalized labels.
///
/// `sre` is the mean squared relative error `mean(((ŷ − y) / (|y| + ε))²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub r2: f64,
    pub rmse: f64,
    pub sre: f64,
    pub mae: f64,
    pub n: usize,
}

impl Metrics {
    /// When the targets have no spread, r² is 1 for an exact fit and 0
    /// otherwise.
    pub fn compute(predictions: &[f64], targets: &[f64]) -> Result<Self, TrainError> {
        if predictions.len() != targets.len() {
            return Err(TrainError::LengthMismatch {
                predictions: predictions.len(),
                targets: targets.len(),
            });
        }
        if targets.is_empty() {
            return Err(TrainError::EmptyEvaluation);
        }
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let (mut ss_res, mut ss_tot, mut abs, mut rel) = (0.0, 0.0, 0.0, 0.0);
        for (&p, &y) in predictions.iter().zip(targets) {
            let e = p - y;
            ss_res += e * e;
            ss_tot += (y - mean) * (y - mean);
            abs += e.abs();
            let r = e / (y.abs() + SRE_EPSILON);
            rel += r * r;
        }
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else if ss_res == 0.0 {
            1.0
        } else {
            0.0
        };
        Ok(Self {
            r2,
            rmse: (ss_res / n).sqrt(),
            sre: rel / n,
            mae: abs / n,
            n: targets.len(),
        })
    }

    /// Field-wise mean; `n` is summed.
    pub fn mean(all: &[Metrics]) -> Option<Metrics> {
        if all.is_empty() {
            return None;
        }
        let k = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / k;
        Some(Metrics {
            r2: avg(|m| m.r2),
            rmse: avg(|m| m.rmse),
            sre: avg(|m| m.sre),
            mae: avg(|m| m.mae),
            n: all.iter().map(|m| m.n).sum(),
        })
    }
}
