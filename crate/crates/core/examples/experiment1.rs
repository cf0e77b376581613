//! Compare the DG, FC and GN joins and the fingerprint MLP on random splits, with short training so the example runs in about a
//! minute. Pass an epoch count to train longer.

use dgnn::baseline::MlpConfig;
use dgnn::dataset::{
    DatasetManifest, MoleculeLibrary, PairConstraints, SplitFractions, SplitProtocol, SyntheticLabeler,
};
use dgnn::mpnn::ModelConfig;
use dgnn::trainkit::{experiment1_methods, run_experiment, ExperimentConfig, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(30);
    let m = DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::new(0, 1.0),
    );
    let mut template = ModelConfig::default().with_hidden_dim(16);
    template.mlp_width = 32;
    let mlp = MlpConfig {
        hidden: vec![128, 32],
        ..MlpConfig::default()
    };
    let config = ExperimentConfig {
        seeds: vec![0, 1, 2],
        fractions: SplitFractions::default(),
        train: TrainConfig {
            epochs,
            ..TrainConfig::default()
        },
        methods: experiment1_methods(&template, &mlp),
    };
    let result = run_experiment(&m, SplitProtocol::Random, &config)?;
    print!("{}", result.to_csv());
    Ok(())
}
