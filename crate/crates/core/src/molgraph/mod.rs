//! Molecular graphs, node/edge featurization, the three ways of joining a
//! pair of reactant graphs into one network input, and node-feature
//! normalization.
//!
//! Molecules are read from and written to a small JSON schema:
//!
//! ```json
//! {"atoms":[{"el":"C","q":0,"xyz":null}, ...], "bonds":[[0,1,1], ...], "role":"alcohol"}
//! ```

mod features;
mod join;
mod normalize;

pub use features::{featurize, EdgeKind, EDGE_FEATURES, NODE_FEATURES};
pub use join::{join, Edge, JoinStrategy, JoinedGraph};
pub use normalize::Normalizer;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::Fnv1a;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("molecule has no atoms")]
    Empty,
    #[error("bond ({0}, {1}) references a missing atom")]
    BondOutOfRange(usize, usize),
    #[error("bond ({0}, {0}) is a self loop")]
    SelfLoop(usize),
    #[error("bond order {0} not in 1..=3")]
    BondOrder(u8),
    #[error("duplicate bond ({0}, {1})")]
    DuplicateBond(usize, usize),
    #[error("molecule is not connected")]
    Disconnected,
    #[error("either all atoms carry coordinates or none do")]
    PartialCoordinates,
    #[error("non-finite coordinate on atom {0}")]
    NonFiniteCoordinate(usize),
    #[error("normalizer used before fit")]
    NotFitted,
    #[error("normalizer fit on zero nodes")]
    NoTrainingNodes,
    #[error("feature width {got} does not match normalizer width {expected}")]
    FeatureWidth { expected: usize, got: usize },
}

/// Chemical elements the featurizer knows about, in one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    H,
    C,
    N,
    O,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 8] = [
        Element::H,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    /// Position in the one-hot block.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_heavy(self) -> bool {
        self != Element::H
    }

    /// Cl, Br or I: the leaving groups of the acyl halides in scope.
    pub fn is_reactive_halogen(self) -> bool {
        matches!(self, Element::Cl | Element::Br | Element::I)
    }
}

impl FromStr for Element {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element::ALL
            .into_iter()
            .find(|e| e.symbol() == s)
            .ok_or_else(|| GraphError::UnknownElement(s.to_owned()))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "el")]
    pub element: Element,
    #[serde(rename = "q")]
    pub formal_charge: i32,
    /// Cartesian position in Å.
    #[serde(rename = "xyz")]
    pub coords: Option<[f64; 3]>,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Self {
            element,
            formal_charge: 0,
            coords: None,
        }
    }

    pub fn with_charge(mut self, q: i32) -> Self {
        self.formal_charge = q;
        self
    }

    pub fn at(mut self, xyz: [f64; 3]) -> Self {
        self.coords = Some(xyz);
        self
    }
}

/// Undirected bond, serialized as `[i, j, order]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, u8)", into = "(usize, usize, u8)")]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: u8,
}

impl From<(usize, usize, u8)> for Bond {
    fn from((a, b, order): (usize, usize, u8)) -> Self {
        Self { a, b, order }
    }
}

impl From<Bond> for (usize, usize, u8) {
    fn from(b: Bond) -> Self {
        (b.a, b.b, b.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Alcohol,
    AcylHalide,
    #[default]
    Unknown,
}

#[derive(Deserialize)]
struct RawGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    #[serde(default)]
    role: Role,
}

/// One internally connected molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    role: Role,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, u8)>>,
}

impl TryFrom<RawGraph> for MolecularGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        MolecularGraph::new(raw.atoms, raw.bonds, raw.role)
    }
}

impl MolecularGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>, role: Role) -> Result<Self, GraphError> {
        if atoms.is_empty() {
            return Err(GraphError::Empty);
        }
        let with_coords = atoms.iter().filter(|a| a.coords.is_some()).count();
        if with_coords != 0 && with_coords != atoms.len() {
            return Err(GraphError::PartialCoordinates);
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.coords.is_some_and(|c| c.iter().any(|v| !v.is_finite())) {
                return Err(GraphError::NonFiniteCoordinate(i));
            }
        }
        let n = atoms.len();
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for bond in &bonds {
            let (a, b) = (bond.a, bond.b);
            if a >= n || b >= n {
                return Err(GraphError::BondOutOfRange(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(1..=3).contains(&bond.order) {
                return Err(GraphError::BondOrder(bond.order));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(GraphError::DuplicateBond(a, b));
            }
            adjacency[a].push((b, bond.order));
            adjacency[b].push((a, bond.order));
        }
        let graph = Self {
            atoms,
            bonds,
            role,
            adjacency,
        };
        if graph.hop_distances_from(0).iter().any(Option::is_none) {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    /// Parses one molecule from its JSON form.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn has_coords(&self) -> bool {
        self.atoms[0].coords.is_some()
    }

    /// `(neighbor, bond order)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, u8)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_order(&self, i: usize, j: usize) -> Option<u8> {
        self.adjacency[i].iter().find(|&&(k, _)| k == j).map(|&(_, o)| o)
    }

    /// Shortest-path lengths in bonds from `start`; `None` for unreachable atoms.
    pub fn hop_distances_from(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.atoms.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &(w, _) in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn euclidean_distance(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = (self.atoms[i].coords?, self.atoms[j].coords?);
        Some(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
    }

    /// Copy with atoms renumbered: atom `i` of `self` becomes atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length");
        let mut atoms = self.atoms.clone();
        for (i, atom) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = atom.clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        Self::new(atoms, bonds, self.role)
    }

    /// Order-independent identity hash from iterated neighborhood refinement.
    ///
    /// Relabeled copies of a molecule share a key; distinct molecules of the
    /// kind found in the reaction library get distinct keys.
    pub fn identity_key(&self) -> u64 {
        let n = self.atoms.len();
        let mut labels: Vec<u64> = self
            .atoms
            .iter()
            .map(|a| {
                Fnv1a::new()
                    .bytes(a.element.symbol().as_bytes())
                    .i64(i64::from(a.formal_charge))
                    .finish()
            })
            .collect();
        for _ in 0..n {
            labels = (0..n)
                .map(|v| {
                    let mut env: Vec<(u8, u64)> = self.adjacency[v].iter().map(|&(w, o)| (o, labels[w])).collect();
                    env.sort_unstable();
                    env.iter()
                        .fold(Fnv1a::new().u64(labels[v]), |h, &(o, l)| h.u64(u64::from(o)).u64(l))
                        .finish()
                })
                .collect();
        }
        labels.sort_unstable();
        labels
            .iter()
            .fold(Fnv1a::new().u64(n as u64).u64(self.bonds.len() as u64), |h, &l| {
                h.u64(l)
            })
            .finish()
    }

    /// Indices of oxygens carrying an explicit hydrogen.
    pub fn hydroxyl_oxygens(&self) -> Vec<usize> {
        (0..self.num_atoms())
            .filter(|&i| {
                self.atoms[i].element == Element::O
                    && self.adjacency[i]
                        .iter()
                        .any(|&(j, o)| o == 1 && self.atoms[j].element == Element::H)
            })
            .collect()
    }

    /// `(carbonyl carbon, halogen)` pairs of every `C(=O)–X` group, X ∈ {Cl, Br, I}.
    pub fn acyl_halide_groups(&self) -> Vec<(usize, usize)> {
        let mut groups = Vec::new();
        for c in 0..self.num_atoms() {
            if self.atoms[c].element != Element::C {
                continue;
            }
            let has_carbonyl = self.adjacency[c]
                .iter()
                .any(|&(j, o)| o == 2 && self.atoms[j].element == Element::O);
            if !has_carbonyl {
                continue;
            }
            for &(x, o) in &self.adjacency[c] {
                if o == 1 && self.atoms[x].element.is_reactive_halogen() {
                    groups.push((c, x));
                }
            }
        }
        groups
    }

    /// Halogen of the first acyl-halide group, if any.
    pub fn leaving_halogen(&self) -> Option<Element> {
        self.acyl_halide_groups().first().map(|&(_, x)| self.atoms[x].element)
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element.is_heavy()).count()
    }

    /// Independent cycles (bonds − atoms + 1 for a connected graph).
    pub fn ring_count(&self) -> usize {
        (self.bonds.len() + 1).saturating_sub(self.atoms.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ethanol() -> MolecularGraph {
        MolecularGraph::from_json(
            r#"{"atoms":[{"el":"C","q":0,"xyz":null},{"el":"C","q":0,"xyz":null},{"el":"O","q":0,"xyz":null},{"el":"H","q":0,"xyz":null}],
                "bonds":[[0,1,1],[1,2,1],[2,3,1]],"role":"alcohol"}"#,
        )
        .unwrap()
    }

    #[test]
    fn parses_and_serializes_schema() {
        let g = ethanol();
        assert_eq!(g.num_atoms(), 4);
        assert_eq!(g.role(), Role::Alcohol);
        let json = g.to_json();
        assert!(json.contains(r#""el":"O""#));
        assert!(json.contains(r#""xyz":null"#));
        assert!(json.contains("[2,3,1]"));
        assert_eq!(MolecularGraph::from_json(&json).unwrap(), g);
    }

    #[test]
    fn rejects_invalid_graphs() {
        let c = || Atom::new(Element::C);
        let b = |a, b, o| Bond { a, b, order: o };
        assert_eq!(
            MolecularGraph::new(vec![], vec![], Role::Unknown),
            Err(GraphError::Empty)
        );
        assert_eq!(
            MolecularGraph::new(vec![c(), c()], vec![b(0, 2, 1)], Role::Unknown),
            Err(GraphError::BondOutOfRange(0, 2))
        );
        assert_eq!(
            MolecularGraph::new(vec![c(), c()], vec![b(1, 1, 1), b(0, 1, 1)], Role::Unknown),
            Err(GraphError::SelfLoop(1))
        );
        assert_eq!(
            MolecularGraph::new(vec![c(), c()], vec![b(0, 1, 1), b(1, 0, 2)], Role::Unknown),
            Err(GraphError::DuplicateBond(1, 0))
        );
        assert_eq!(
            MolecularGraph::new(vec![c(), c()], vec![b(0, 1, 4)], Role::Unknown),
            Err(GraphError::BondOrder(4))
        );
        assert_eq!(
            MolecularGraph::new(vec![c(), c(), c()], vec![b(0, 1, 1)], Role::Unknown),
            Err(GraphError::Disconnected)
        );
        assert_eq!(
            MolecularGraph::new(vec![c().at([0.0; 3]), c()], vec![b(0, 1, 1)], Role::Unknown),
            Err(GraphError::PartialCoordinates)
        );
        assert!(MolecularGraph::from_json(r#"{"atoms":[{"el":"Xe","q":0,"xyz":null}],"bonds":[]}"#).is_err());
    }

    #[test]
    fn substructure_patterns() {
        let g = ethanol();
        assert_eq!(g.hydroxyl_oxygens(), vec![2]);
        assert!(g.acyl_halide_groups().is_empty());

        let acetyl_bromide = MolecularGraph::new(
            vec![
                Atom::new(Element::C),
                Atom::new(Element::C),
                Atom::new(Element::O),
                Atom::new(Element::Br),
            ],
            vec![(0, 1, 1).into(), (1, 2, 2).into(), (1, 3, 1).into()],
            Role::AcylHalide,
        )
        .unwrap();
        assert_eq!(acetyl_bromide.acyl_halide_groups(), vec![(1, 3)]);
        assert_eq!(acetyl_bromide.leaving_halogen(), Some(Element::Br));
        assert!(acetyl_bromide.hydroxyl_oxygens().is_empty());
    }

    #[test]
    fn identity_key_ignores_numbering() {
        let g = ethanol();
        let p = g.permuted(&[3, 1, 0, 2]).unwrap();
        assert_ne!(g, p);
        assert_eq!(g.identity_key(), p.identity_key());

        let dimethyl_ether = MolecularGraph::new(
            vec![Atom::new(Element::C), Atom::new(Element::O), Atom::new(Element::C)],
            vec![(0, 1, 1).into(), (1, 2, 1).into()],
            Role::Unknown,
        )
        .unwrap();
        assert_ne!(g.identity_key(), dimethyl_ether.identity_key());
    }

    #[test]
    fn ring_count_and_hops() {
        let ring = MolecularGraph::new(
            (0..4).map(|_| Atom::new(Element::C)).collect(),
            vec![(0, 1, 1).into(), (1, 2, 1).into(), (2, 3, 1).into(), (3, 0, 1).into()],
            Role::Unknown,
        )
        .unwrap();
        assert_eq!(ring.ring_count(), 1);
        assert_eq!(ring.hop_distances_from(0), vec![Some(0), Some(1), Some(2), Some(1)]);
    }
}
