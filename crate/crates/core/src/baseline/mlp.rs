use serde::{Deserialize, Serialize};

use super::fingerprint::{morgan_fingerprint, DEFAULT_BITS, DEFAULT_RADIUS};
use crate::autodiff::{Bound, ParamStore, Tape, Tensor, Var};
use crate::dataset::ReactionSample;
use crate::error::Result;
use crate::hash::rng_for;
use crate::mpnn::ModelError;
use crate::nn::FeedForward;
use crate::trainkit::Regressor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub radius: usize,
    pub nbits: usize,
    /// Hidden layer widths between the `2·nbits` input and the scalar output.
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            nbits: DEFAULT_BITS,
            hidden: vec![512, 128],
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nbits == 0 || self.hidden.contains(&0) {
            return Err(ModelError::InvalidConfig(
                "fingerprint and layer widths must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Set bits of the alcohol fingerprint followed by those of the acyl halide
/// fingerprint, offset by `nbits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintPair {
    pub ones: Vec<usize>,
}

/// Feed-forward regressor on concatenated fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    config: MlpConfig,
    store: ParamStore,
    net: FeedForward,
}

impl Mlp {
    pub fn new(config: MlpConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut widths = vec![2 * config.nbits];
        widths.extend(&config.hidden);
        widths.push(1);
        let mut rng = rng_for(config.seed, "mlp/init");
        let mut store = ParamStore::new();
        let net = FeedForward::new(&mut store, "mlp", &widths, 1.0, &mut rng);
        Ok(Self { config, store, net })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn net(&self) -> &FeedForward {
        &self.net
    }

    pub fn fingerprints(&self, sample: &ReactionSample) -> FingerprintPair {
        let (r, n) = (self.config.radius, self.config.nbits);
        let a = morgan_fingerprint(&sample.alcohol, r, n);
        let h = morgan_fingerprint(&sample.acyl_halide, r, n);
        FingerprintPair {
            ones: a.ones().chain(h.ones().map(|b| b + n)).collect(),
        }
    }

    /// Dense `B × 2·nbits` input matrix.
    pub fn input_matrix(&self, inputs: &[&FingerprintPair]) -> Tensor {
        let width = 2 * self.config.nbits;
        let mut x = Tensor::zeros(inputs.len(), width);
        for (r, fp) in inputs.iter().enumerate() {
            let row = x.row_mut(r);
            for &b in &fp.ones {
                row[b] = 1.0;
            }
        }
        x
    }
}

impl Regressor for Mlp {
    type Input = FingerprintPair;

    fn label(&self) -> String {
        "MLP".into()
    }

    fn fit_inputs(&mut self, _train: &[&ReactionSample]) -> Result<()> {
        Ok(())
    }

    fn prepare(&self, sample: &ReactionSample) -> Result<FingerprintPair> {
        Ok(self.fingerprints(sample))
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn forward(&self, tape: &mut Tape, bound: &Bound, inputs: &[&FingerprintPair]) -> Result<Var> {
        let x = tape.constant(self.input_matrix(inputs));
        Ok(self.net.forward(tape, bound, x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::gradcheck::check_gradients;
    use crate::dataset::{DatasetManifest, MoleculeLibrary, PairConstraints, SyntheticLabeler};

    fn samples() -> Vec<ReactionSample> {
        let m = DatasetManifest::generate(
            &MoleculeLibrary::toy(),
            &PairConstraints::default(),
            &SyntheticLabeler::default(),
        );
        m.samples.into_iter().step_by(37).collect()
    }

    fn small() -> Mlp {
        Mlp::new(MlpConfig {
            nbits: 64,
            hidden: vec![8, 4],
            ..MlpConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_weights_give_bias() {
        let mut m = small();
        for t in m.store_mut().tensors_mut() {
            t.data_mut().fill(0.0);
        }
        let last = m.net().layers().last().unwrap().bias;
        m.store_mut().get_mut(last).data_mut()[0] = 0.75;
        let s = samples();
        let inputs: Vec<_> = s.iter().map(|x| m.prepare(x).unwrap()).collect();
        let y = m.predict(&inputs.iter().collect::<Vec<_>>()).unwrap();
        assert!(y.iter().all(|&v| v == 0.75));
    }

    #[test]
    fn default_shape() {
        let m = Mlp::new(MlpConfig::default()).unwrap();
        let shapes: Vec<_> = m
            .net()
            .layers()
            .iter()
            .map(|l| m.store().get(l.weight).shape())
            .collect();
        assert_eq!(shapes, vec![(2048, 512), (512, 128), (128, 1)]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = small();
        let s = samples();
        let inputs: Vec<_> = s.iter().take(4).map(|x| m.prepare(x).unwrap()).collect();
        let refs: Vec<_> = inputs.iter().collect();
        let x = m.input_matrix(&refs);
        let params: Vec<Tensor> = m.store().tensors().to_vec();
        let report = check_gradients(&params, 1e-6, |t, v| {
            let mut h = t.constant(x.clone());
            for (i, layer) in m.net().layers().iter().enumerate() {
                let act = if i + 1 == m.net().layers().len() {
                    crate::autodiff::Activation::None
                } else {
                    crate::autodiff::Activation::Relu
                };
                h = t.dense(h, v[layer.weight.index()], v[layer.bias.index()], act)?;
            }
            let sq = t.mul(h, h)?;
            Ok(t.sum(sq))
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }

    #[test]
    fn swapping_roles_changes_prediction() {
        let m = small();
        let s = &samples()[1];
        let swapped = ReactionSample::new(0, s.acyl_halide.clone(), s.alcohol.clone(), 0.0);
        let (a, b) = (m.prepare(s).unwrap(), m.prepare(&swapped).unwrap());
        let y = m.predict(&[&a, &b]).unwrap();
        assert_ne!(y[0], y[1]);
    }
}
