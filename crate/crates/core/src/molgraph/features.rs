use serde::{Deserialize, Serialize};

use super::MolecularGraph;
use crate::autodiff::Tensor;

/// Width of a node feature row: element one-hot (8), formal charge (1),
/// degree one-hot for degrees 1–4 (4).
pub const NODE_FEATURES: usize = 13;

/// Width of an edge feature row: bond-order one-hot for orders 1–3 plus a
/// virtual class (4), edge-kind one-hot (3), distance (1).
pub const EDGE_FEATURES: usize = 8;

const CHARGE_SLOT: usize = 8;
const DEGREE_SLOT: usize = 9;

/// Initial node features of one molecule, one row per atom.
///
/// Degree 0 leaves the degree block empty; degrees above 4 share the last slot.
pub fn featurize(g: &MolecularGraph) -> Tensor {
    let mut x = Tensor::zeros(g.num_atoms(), NODE_FEATURES);
    for (i, atom) in g.atoms().iter().enumerate() {
        let row = x.row_mut(i);
        row[atom.element.index()] = 1.0;
        row[CHARGE_SLOT] = f64::from(atom.formal_charge);
        let degree = g.degree(i);
        if degree > 0 {
            row[DEGREE_SLOT + degree.min(4) - 1] = 1.0;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// A chemical bond.
    Bond,
    /// A non-physical connection added by the fully connected join.
    Virtual,
    /// A connection to the added global node.
    Global,
}

impl EdgeKind {
    fn slot(self) -> usize {
        match self {
            EdgeKind::Bond => 4,
            EdgeKind::Virtual => 5,
            EdgeKind::Global => 6,
        }
    }
}

/// Encodes one edge. `bond_order` is `Some` exactly for bond edges; other
/// edges use the virtual bond class.
pub(crate) fn edge_row(kind: EdgeKind, bond_order: Option<u8>, distance: f64) -> [f64; EDGE_FEATURES] {
    let mut row = [0.0; EDGE_FEATURES];
    match bond_order {
        Some(o) => row[usize::from(o) - 1] = 1.0,
        None => row[3] = 1.0,
    }
    row[kind.slot()] = 1.0;
    row[7] = distance;
    row
}
