//! How one reactant pair looks under the three joins.

use dgnn::dataset::{DatasetManifest, MoleculeLibrary, PairConstraints, SyntheticLabeler};
use dgnn::molgraph::{EdgeKind, JoinStrategy};

fn main() {
    let m = DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::default(),
    );
    let s = &m.samples[0];
    println!(
        "sample {}: alcohol with {} atoms, acyl halide with {} atoms",
        s.id,
        s.alcohol.num_atoms(),
        s.acyl_halide.num_atoms()
    );
    for strategy in JoinStrategy::ALL {
        let g = s.join(strategy);
        let count = |k: EdgeKind| g.edges.iter().filter(|e| e.kind == k).count();
        println!(
            "{strategy}: {} nodes, directed edges: {} bond, {} virtual, {} global",
            g.num_nodes(),
            count(EdgeKind::Bond),
            count(EdgeKind::Virtual),
            count(EdgeKind::Global)
        );
    }
}
