use std::collections::BTreeMap;

use crate::autodiff::Tensor;
use crate::molgraph::{JoinStrategy, JoinedGraph, EDGE_FEATURES, NODE_FEATURES};

/// A joined graph reduced to what the network consumes.
///
/// Edge features are deduplicated into `edge_types`, and edges are grouped by
/// `(destination, edge type)`: since the message is linear in the neighbor
/// states, each group needs one matrix–vector product on the sum of its
/// source states.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGraph {
    pub features: Tensor,
    pub edge_types: Vec<[f64; EDGE_FEATURES]>,
    /// Source node of every directed edge.
    pub src: Vec<usize>,
    /// Group of every directed edge.
    pub group: Vec<usize>,
    pub group_dst: Vec<usize>,
    pub group_type: Vec<usize>,
    /// 0 for the first molecule, 1 for the second, 2 for the global node.
    pub part: Vec<usize>,
    pub global_node: Option<usize>,
    pub strategy: JoinStrategy,
}

fn bits(row: &[f64; EDGE_FEATURES]) -> [u64; EDGE_FEATURES] {
    row.map(f64::to_bits)
}

impl PreparedGraph {
    /// `features` replaces the joined graph's node features (e.g. after
    /// normalization) and must have the same number of rows.
    pub fn new(joined: &JoinedGraph, features: Tensor) -> Self {
        assert_eq!(features.rows(), joined.num_nodes(), "feature rows must match nodes");
        let mut type_index: BTreeMap<[u64; EDGE_FEATURES], usize> = BTreeMap::new();
        let mut edge_types = Vec::new();
        let mut group_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let (mut group_dst, mut group_type) = (Vec::new(), Vec::new());
        let mut src = Vec::with_capacity(joined.edges.len());
        let mut group = Vec::with_capacity(joined.edges.len());
        for e in &joined.edges {
            let row = e.features();
            let t = *type_index.entry(bits(&row)).or_insert_with(|| {
                edge_types.push(row);
                edge_types.len() - 1
            });
            let g = *group_index.entry((e.dst, t)).or_insert_with(|| {
                group_dst.push(e.dst);
                group_type.push(t);
                group_dst.len() - 1
            });
            src.push(e.src);
            group.push(g);
        }
        Self {
            features,
            edge_types,
            src,
            group,
            group_dst,
            group_type,
            part: (0..joined.num_nodes()).map(|v| joined.part(v)).collect(),
            global_node: joined.global_node,
            strategy: joined.strategy,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }
}

/// Disjoint union of several prepared graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBatch {
    pub features: Tensor,
    pub edge_types: Tensor,
    pub src: Vec<usize>,
    pub group: Vec<usize>,
    pub group_dst: Vec<usize>,
    pub group_type: Vec<usize>,
    /// Pooling segment of every node: the sample index, or `2·sample + part`
    /// for disjoint graphs whose molecules are pooled separately.
    pub segment: Vec<usize>,
    pub num_segments: usize,
    /// Global node of every sample, when all samples have one.
    pub global_nodes: Option<Vec<usize>>,
    pub num_samples: usize,
}

impl GraphBatch {
    pub fn new(graphs: &[&PreparedGraph], pool_parts_separately: bool) -> Self {
        let num_nodes: usize = graphs.iter().map(|g| g.num_nodes()).sum();
        let mut features = Vec::with_capacity(num_nodes * NODE_FEATURES);
        let mut type_index: BTreeMap<[u64; EDGE_FEATURES], usize> = BTreeMap::new();
        let mut types: Vec<f64> = Vec::new();
        let (mut src, mut group, mut group_dst, mut group_type) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut segment = Vec::with_capacity(num_nodes);
        let mut global_nodes = Some(Vec::with_capacity(graphs.len()));
        let (mut node_offset, mut group_offset) = (0, 0);

        for (b, g) in graphs.iter().enumerate() {
            features.extend_from_slice(g.features.data());
            let remap: Vec<usize> = g
                .edge_types
                .iter()
                .map(|row| {
                    *type_index.entry(bits(row)).or_insert_with(|| {
                        types.extend_from_slice(row);
                        types.len() / EDGE_FEATURES - 1
                    })
                })
                .collect();
            src.extend(g.src.iter().map(|&s| s + node_offset));
            group.extend(g.group.iter().map(|&k| k + group_offset));
            group_dst.extend(g.group_dst.iter().map(|&v| v + node_offset));
            group_type.extend(g.group_type.iter().map(|&t| remap[t]));
            segment.extend(
                g.part
                    .iter()
                    .map(|&p| if pool_parts_separately { 2 * b + p.min(1) } else { b }),
            );
            global_nodes = match (global_nodes, g.global_node) {
                (Some(mut v), Some(n)) => {
                    v.push(n + node_offset);
                    Some(v)
                }
                _ => None,
            };
            node_offset += g.num_nodes();
            group_offset += g.group_dst.len();
        }

        let num_types = types.len() / EDGE_FEATURES;
        Self {
            features: Tensor::new(num_nodes, NODE_FEATURES, features).expect("node feature rows"),
            edge_types: Tensor::new(num_types, EDGE_FEATURES, types).expect("edge type rows"),
            src,
            group,
            group_dst,
            group_type,
            segment,
            num_segments: if pool_parts_separately {
                2 * graphs.len()
            } else {
                graphs.len()
            },
            global_nodes,
            num_samples: graphs.len(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn num_groups(&self) -> usize {
        self.group_dst.len()
    }
}
