//! Circular fingerprints: relabeling invariance and bit overlap between
//! molecules of the library.

use dgnn::baseline::{morgan_fingerprint, DEFAULT_BITS, DEFAULT_RADIUS};
use dgnn::dataset::MoleculeLibrary;

fn main() {
    let lib = MoleculeLibrary::toy();
    let alcohols = lib.alcohol_graphs();
    let mols = &alcohols[..4];
    let fps: Vec<_> = mols
        .iter()
        .map(|g| morgan_fingerprint(g, DEFAULT_RADIUS, DEFAULT_BITS))
        .collect();
    for (i, fp) in fps.iter().enumerate() {
        let perm: Vec<usize> = (0..mols[i].num_atoms()).rev().collect();
        let moved = morgan_fingerprint(&mols[i].permuted(&perm).unwrap(), DEFAULT_RADIUS, DEFAULT_BITS);
        println!(
            "alcohol {i}: {} bits set, same after relabeling: {}",
            fp.count_ones(),
            moved == *fp
        );
    }
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            let a: Vec<usize> = fps[i].ones().collect();
            let b: Vec<usize> = fps[j].ones().collect();
            let shared = a.iter().filter(|x| b.contains(x)).count();
            let union = a.len() + b.len() - shared;
            println!("tanimoto({i}, {j}) = {:.3}", shared as f64 / union as f64);
        }
    }
}
