use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::features::{edge_row, featurize, EDGE_FEATURES, NODE_FEATURES};
use super::{EdgeKind, MolecularGraph};
use crate::autodiff::Tensor;

/// How two reactant graphs become one network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinStrategy {
    /// Graphs stay disjoint; their pooled embeddings are concatenated.
    #[serde(rename = "dg")]
    Disjoint,
    /// Every pair of nodes is connected; non-bonds are flagged as virtual.
    #[serde(rename = "fc")]
    FullyConnected,
    /// One extra node connected to every atom of both graphs.
    #[serde(rename = "gn")]
    GlobalNode,
}

impl JoinStrategy {
    pub const ALL: [JoinStrategy; 3] = [
        JoinStrategy::Disjoint,
        JoinStrategy::FullyConnected,
        JoinStrategy::GlobalNode,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            JoinStrategy::Disjoint => "dg",
            JoinStrategy::FullyConnected => "fc",
            JoinStrategy::GlobalNode => "gn",
        }
    }
}

impl fmt::Display for JoinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short_name().to_uppercase())
    }
}

impl FromStr for JoinStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dg" | "disjoint" => Ok(JoinStrategy::Disjoint),
            "fc" | "fully_connected" | "fully-connected" => Ok(JoinStrategy::FullyConnected),
            "gn" | "global_node" | "global-node" => Ok(JoinStrategy::GlobalNode),
            other => Err(format!("unknown join strategy {other:?} (expected dg, fc or gn)")),
        }
    }
}

/// Directed edge `src → dst`; messages flow from `src` into `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
    pub bond_order: Option<u8>,
    pub distance: f64,
}

impl Edge {
    pub fn features(&self) -> [f64; EDGE_FEATURES] {
        edge_row(self.kind, self.bond_order, self.distance)
    }
}

/// A reactant pair rendered as a single graph.
///
/// Node order is: atoms of the first graph, atoms of the second graph, then
/// the global node when present. Undirected connections are stored as two
/// directed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedGraph {
    pub node_features: Tensor,
    pub edges: Vec<Edge>,
    pub strategy: JoinStrategy,
    /// Index of the first node of the second graph.
    pub boundary: usize,
    pub global_node: Option<usize>,
}

impl JoinedGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_features.rows()
    }

    /// Number of atom nodes (excludes the global node).
    pub fn num_atoms(&self) -> usize {
        self.global_node.unwrap_or(self.num_nodes())
    }

    /// 0 for the first graph, 1 for the second, 2 for the global node.
    pub fn part(&self, node: usize) -> usize {
        if Some(node) == self.global_node {
            2
        } else if node < self.boundary {
            0
        } else {
            1
        }
    }

    pub fn edge_features(&self) -> Tensor {
        let rows: Vec<[f64; EDGE_FEATURES]> = self.edges.iter().map(Edge::features).collect();
        Tensor::from_rows(&rows).unwrap_or_else(|_| Tensor::zeros(0, EDGE_FEATURES))
    }

    /// Outgoing neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for e in &self.edges {
            adj[e.src].push(e.dst);
        }
        adj
    }
}

/// Joins two molecules with the given strategy.
pub fn join(first: &MolecularGraph, second: &MolecularGraph, strategy: JoinStrategy) -> JoinedGraph {
    let (n1, n2) = (first.num_atoms(), second.num_atoms());
    let boundary = n1;
    let offset = |part: usize, i: usize| if part == 0 { i } else { boundary + i };
    let graphs = [first, second];

    let mut edges = Vec::new();
    let push_pair = |edges: &mut Vec<Edge>, a: usize, b: usize, kind, bond_order, distance| {
        edges.push(Edge {
            src: a,
            dst: b,
            kind,
            bond_order,
            distance,
        });
        edges.push(Edge {
            src: b,
            dst: a,
            kind,
            bond_order,
            distance,
        });
    };

    match strategy {
        JoinStrategy::Disjoint | JoinStrategy::GlobalNode => {
            for (part, g) in graphs.iter().enumerate() {
                for bond in g.bonds() {
                    let d = intra_distance(g, bond.a, bond.b, 1);
                    push_pair(
                        &mut edges,
                        offset(part, bond.a),
                        offset(part, bond.b),
                        EdgeKind::Bond,
                        Some(bond.order),
                        d,
                    );
                }
            }
        }
        JoinStrategy::FullyConnected => {
            let hops: Vec<Vec<Vec<Option<usize>>>> = graphs
                .iter()
                .map(|g| (0..g.num_atoms()).map(|i| g.hop_distances_from(i)).collect())
                .collect();
            let locate = |v: usize| if v < boundary { (0, v) } else { (1, v - boundary) };
            for u in 0..n1 + n2 {
                for v in u + 1..n1 + n2 {
                    let ((pu, iu), (pv, iv)) = (locate(u), locate(v));
                    if pu != pv {
                        push_pair(&mut edges, u, v, EdgeKind::Virtual, None, 0.0);
                        continue;
                    }
                    let g = graphs[pu];
                    let hop = hops[pu][iu][iv].expect("molecules are connected");
                    match g.bond_order(iu, iv) {
                        Some(order) => push_pair(
                            &mut edges,
                            u,
                            v,
                            EdgeKind::Bond,
                            Some(order),
                            intra_distance(g, iu, iv, 1),
                        ),
                        None => push_pair(
                            &mut edges,
                            u,
                            v,
                            EdgeKind::Virtual,
                            None,
                            intra_distance(g, iu, iv, hop),
                        ),
                    }
                }
            }
        }
    }

    let mut features = featurize(first).into_data();
    features.extend(featurize(second).into_data());
    let mut num_nodes = n1 + n2;
    let mut global_node = None;
    if strategy == JoinStrategy::GlobalNode {
        let g = num_nodes;
        for v in 0..g {
            push_pair(&mut edges, v, g, EdgeKind::Global, None, 0.0);
        }
        features.extend([0.0; NODE_FEATURES]);
        num_nodes += 1;
        global_node = Some(g);
    }

    JoinedGraph {
        node_features: Tensor::new(num_nodes, NODE_FEATURES, features).expect("feature rows"),
        edges,
        strategy,
        boundary,
        global_node,
    }
}

/// Euclidean distance when coordinates exist, otherwise the inverse hop count.
fn intra_distance(g: &MolecularGraph, i: usize, j: usize, hops: usize) -> f64 {
    g.euclidean_distance(i, j).unwrap_or(1.0 / hops as f64)
}
