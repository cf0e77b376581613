//! Save a trained model and check the reloaded copy predicts identically.

use dgnn::dataset::{
    split, DatasetManifest, MoleculeLibrary, PairConstraints, Split, SplitFractions, SplitProtocol, SyntheticLabeler,
};
use dgnn::mpnn::{Checkpoint, ModelConfig};
use dgnn::trainkit::{fit, ModelSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::default(),
    );
    let mut m = split(&m, SplitProtocol::Random, SplitFractions::default(), 1)?;
    m.normalize_labels()?;
    let mut config = ModelConfig::default().with_hidden_dim(8);
    config.normalize = true;
    let train = TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    };
    let (model, _) = fit(&ModelSpec::Mpnn(config), &m, &train)?;

    let path = std::env::temp_dir().join("dgnn_checkpoint.json");
    Checkpoint::new(model.clone(), m.label_stats).save(&path)?;
    let loaded = Checkpoint::load(&path)?;
    let test = m.samples_in(Split::Test);
    let a = model.predict_samples(&test)?;
    let b = loaded.model.predict_samples(&test)?;
    let same = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    let stats = loaded.label_stats.expect("stats saved");
    println!("{} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!(
        "first test prediction {:.4} kcal/mol, bit-identical after reload: {same}",
        stats.denormalize(a[0])
    );
    Ok(())
}
