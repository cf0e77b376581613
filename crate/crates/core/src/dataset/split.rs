use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetManifest, Split};
use crate::hash::rng_for;
use crate::molgraph::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitProtocol {
    /// Samples assigned independently of their molecules.
    Random,
    /// Every alcohol appears in exactly one of train, val and test.
    LeaveAlcoholOut,
}

impl fmt::Display for SplitProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitProtocol::Random => "random",
            SplitProtocol::LeaveAlcoholOut => "leave-alcohol-out",
        })
    }
}

impl FromStr for SplitProtocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SplitProtocol::Random),
            "leave-alcohol-out" | "leave_alcohol_out" => Ok(SplitProtocol::LeaveAlcoholOut),
            other => Err(format!("unknown split protocol {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, DatasetError> {
        let f = Self { train, val, test };
        let all = [train, val, test];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) || (train + val + test - 1.0).abs() > 1e-9 {
            return Err(DatasetError::Fractions(all));
        }
        Ok(f)
    }

    /// `(train, val, test)` counts for `n` items: val and test are floored,
    /// the remainder goes to train.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        // the epsilon absorbs representation error such as 360 × 0.1
        let floor = |f: f64| ((n as f64) * f + 1e-9).floor() as usize;
        let val = floor(self.val).min(n);
        let test = floor(self.test).min(n - val);
        (n - val - test, val, test)
    }
}

impl FromStr for SplitFractions {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad fraction {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            &[a, b, c] => Self::new(a, b, c).map_err(|e| e.to_string()),
            _ => Err(format!("expected three comma-separated fractions, got {s:?}")),
        }
    }
}

/// Assigns every sample to train, val or test.
///
/// Label statistics are cleared; call [`DatasetManifest::normalize_labels`]
/// afterwards.
pub fn split(
    manifest: &DatasetManifest,
    protocol: SplitProtocol,
    fractions: SplitFractions,
    seed: u64,
) -> Result<DatasetManifest, DatasetError> {
    let mut out = manifest.clone();
    out.label_stats = None;
    out.protocol = Some(protocol);
    for s in &mut out.samples {
        s.label_norm = None;
    }

    match protocol {
        SplitProtocol::Random => {
            let mut order: Vec<usize> = (0..out.samples.len()).collect();
            order.shuffle(&mut rng_for(seed, "split/random"));
            let (_, n_val, n_test) = fractions.counts(order.len());
            for (rank, &i) in order.iter().enumerate() {
                out.samples[i].split = Some(if rank < n_val {
                    Split::Val
                } else if rank < n_val + n_test {
                    Split::Test
                } else {
                    Split::Train
                });
            }
        }
        SplitProtocol::LeaveAlcoholOut => {
            let keys: Vec<u64> = out.samples.iter().map(|s| s.alcohol.identity_key()).collect();
            let mut alcohols: Vec<u64> = keys.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
            alcohols.shuffle(&mut rng_for(seed, "split/leave-alcohol-out"));
            let (n_train, n_val, n_test) = fractions.counts(alcohols.len());
            if n_train == 0 || (fractions.val > 0.0 && n_val == 0) || (fractions.test > 0.0 && n_test == 0) {
                return Err(DatasetError::InfeasibleSplit(format!(
                    "{} distinct alcohols cannot populate fractions {:?}",
                    alcohols.len(),
                    [fractions.train, fractions.val, fractions.test]
                )));
            }
            let assign = |key: u64| {
                let rank = alcohols.iter().position(|&k| k == key).expect("key collected above");
                if rank < n_val {
                    Split::Val
                } else if rank < n_val + n_test {
                    Split::Test
                } else {
                    Split::Train
                }
            };
            for (s, &k) in out.samples.iter_mut().zip(&keys) {
                s.split = Some(assign(k));
            }
            let all: BTreeSet<Element> = out
                .samples
                .iter()
                .filter_map(|s| s.acyl_halide.leaving_halogen())
                .collect();
            let train = out.halogens_in(Split::Train);
            if let Some(missing) = all.difference(&train).next() {
                return Err(DatasetError::InfeasibleSplit(format!(
                    "halogen {missing} absent from train"
                )));
            }
        }
    }
    Ok(out)
}
