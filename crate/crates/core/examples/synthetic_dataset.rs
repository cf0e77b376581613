//! Generate the synthetic dataset, split it both ways and save a manifest.

use dgnn::dataset::{
    split, DatasetManifest, MoleculeLibrary, PairConstraints, Split, SplitFractions, SplitProtocol, SyntheticLabeler,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lib = MoleculeLibrary::toy();
    let m = DatasetManifest::generate(&lib, &PairConstraints::default(), &SyntheticLabeler::new(0, 1.0));
    let labels: Vec<f64> = m.samples.iter().map(|s| s.label).collect();
    let lo = labels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "{} alcohols x {} acyl halides -> {} samples, labels in [{lo:.2}, {hi:.2}] kcal/mol",
        lib.alcohol_graphs().len(),
        lib.acyl_halide_graphs().len(),
        m.len()
    );
    for protocol in [SplitProtocol::Random, SplitProtocol::LeaveAlcoholOut] {
        let mut s = split(&m, protocol, SplitFractions::default(), 0)?;
        let stats = s.normalize_labels()?;
        let sizes: Vec<String> = Split::ALL
            .iter()
            .map(|&x| format!("{x} {}", s.samples_in(x).len()))
            .collect();
        println!(
            "{protocol}: {}; train label mean {:.3}, std {:.3}",
            sizes.join(", "),
            stats.mean,
            stats.std
        );
    }
    let path = std::env::temp_dir().join("dgnn_manifest.jsonl");
    m.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
