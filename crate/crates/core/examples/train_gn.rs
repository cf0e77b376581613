//! Train a small global-node network on a random split and report metrics.

use dgnn::dataset::{
    split, DatasetManifest, MoleculeLibrary, PairConstraints, Split, SplitFractions, SplitProtocol, SyntheticLabeler,
};
use dgnn::molgraph::JoinStrategy;
use dgnn::mpnn::{ModelConfig, Readout};
use dgnn::trainkit::{ModelSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::new(0, 1.0),
    );
    let mut m = split(&m, SplitProtocol::Random, SplitFractions::default(), 0)?;
    m.normalize_labels()?;

    let mut config = ModelConfig::new(JoinStrategy::GlobalNode, Readout::GatedSum).with_hidden_dim(16);
    config.mlp_width = 32;
    let train = TrainConfig {
        epochs: 60,
        patience: Some(20),
        ..TrainConfig::default()
    };
    let mut model = ModelSpec::Mpnn(config).build()?;
    let report = model.train(&m, &train, |e| {
        if e.epoch % 10 == 0 {
            let val = e.val.map(|v| format!("{:.4}", v.rmse)).unwrap_or_default();
            println!("epoch {:>3}  train MSE {:.4}  val RMSE {val}", e.epoch, e.train_mse);
        }
    })?;
    println!(
        "kept epoch {} (val RMSE {:.4})",
        report.best_epoch,
        report.best_val_rmse.unwrap_or(f64::NAN)
    );
    for s in Split::ALL {
        let r = model.evaluate(&m, s)?;
        println!("{s:>5}: r2 {:.4}  RMSE {:.4}  MAE {:.4}", r.r2, r.rmse, r.mae);
    }
    Ok(())
}
