//! Message-passing network over joined reactant graphs.
//!
//! A forward pass embeds node features linearly, runs `T` message steps with
//! one edge network and one GRU shared across steps, pools node states with
//! one of three gated readouts and maps the pooled embedding to a scalar with
//! a linear head. For the disjoint strategy the two molecules are pooled
//! separately and their embeddings concatenated before the head.
//!
//! The edge network maps an edge feature row to `d²` values read row-major
//! as a `d × d` matrix `A`; the message into `v` is `Σ_w A(e_vw) h_w` over
//! directed edges `w → v`.

mod batch;
mod checkpoint;

pub use batch::{GraphBatch, PreparedGraph};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Activation, Bound, ParamStore, Tape, Tensor, Var};
use crate::dataset::ReactionSample;
use crate::error::Result;
use crate::hash::rng_for;
use crate::molgraph::{JoinStrategy, Normalizer, EDGE_FEATURES, NODE_FEATURES};
use crate::nn::{FeedForward, Gru, Linear};
use crate::trainkit::Regressor;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("global-node readout requires every graph to have a global node")]
    NoGlobalNode,
    #[error("sample joined with {got} but model expects {expected}")]
    StrategyMismatch { expected: JoinStrategy, got: JoinStrategy },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Graph-level pooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Readout {
    /// `Σ_v σ(i([h_v^T ‖ h_v^0])) ⊙ j(h_v^T)`.
    #[serde(rename = "gated")]
    GatedSum,
    /// The gated term evaluated at the global node only.
    #[serde(rename = "gr")]
    GlobalNode,
    /// Gate computed from the concatenation of all step states.
    #[serde(rename = "cr")]
    Concat,
}

impl Readout {
    pub const ALL: [Readout; 3] = [Readout::GatedSum, Readout::GlobalNode, Readout::Concat];

    pub fn short_name(self) -> &'static str {
        match self {
            Readout::GatedSum => "gated",
            Readout::GlobalNode => "gr",
            Readout::Concat => "cr",
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Readout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gated" | "gated_sum" | "gated-sum" | "sum" => Ok(Readout::GatedSum),
            "gr" | "global" => Ok(Readout::GlobalNode),
            "cr" | "concat" => Ok(Readout::Concat),
            other => Err(format!("unknown readout {other:?} (expected gated, gr or cr)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Node state width `d`.
    pub hidden_dim: usize,
    /// Message-passing steps `T`.
    pub steps: usize,
    /// Hidden width of the edge network and the readout networks.
    pub mlp_width: usize,
    /// Width of the pooled embedding.
    pub readout_dim: usize,
    pub readout: Readout,
    pub strategy: JoinStrategy,
    /// Column-then-row normalization of initial node features.
    pub normalize: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            steps: 3,
            mlp_width: 128,
            readout_dim: 64,
            readout: Readout::GatedSum,
            strategy: JoinStrategy::GlobalNode,
            normalize: false,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn new(strategy: JoinStrategy, readout: Readout) -> Self {
        Self {
            strategy,
            readout,
            ..Self::default()
        }
    }

    /// Sets `d` and keeps the readout width equal to it.
    pub fn with_hidden_dim(mut self, d: usize) -> Self {
        self.hidden_dim = d;
        self.readout_dim = d;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_owned()));
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be at least 1");
        }
        if self.mlp_width == 0 || self.readout_dim == 0 {
            return bad("network widths must be at least 1");
        }
        if self.readout == Readout::GlobalNode && self.strategy != JoinStrategy::GlobalNode {
            return bad("the gr readout requires the gn strategy");
        }
        Ok(())
    }

    /// Short label such as `GN+Norm+CR`.
    pub fn label(&self) -> String {
        let mut s = self.strategy.to_string();
        if self.normalize {
            s.push_str("+Norm");
        }
        match self.readout {
            Readout::GatedSum => {}
            r => s.push_str(&format!("+{}", r.short_name().to_uppercase())),
        }
        s
    }
}

/// Scale of the edge network's initial output layer. Messages sum over up to
/// dozens of neighbors under the fully connected join, so the initial edge
/// matrices are kept small.
const EDGE_OUTPUT_GAIN: f64 = 0.1;

/// Parameters and configuration of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mpnn {
    config: ModelConfig,
    store: ParamStore,
    embed: Linear,
    edge_net: FeedForward,
    gru: Gru,
    i_net: FeedForward,
    j_net: FeedForward,
    head: Linear,
    normalizer: Normalizer,
}

impl Mpnn {
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        Ok(Self::build(config))
    }

    /// Skips validation, for contrived configurations such as `T = 0`.
    pub(crate) fn build(config: ModelConfig) -> Self {
        let (d, w, out) = (config.hidden_dim, config.mlp_width, config.readout_dim);
        let mut rng = rng_for(config.seed, "mpnn/init");
        let mut store = ParamStore::new();
        let embed = Linear::new(&mut store, "embed", NODE_FEATURES, d, 1.0, &mut rng);
        let edge_net = FeedForward::new(
            &mut store,
            "edge",
            &[EDGE_FEATURES, w, w, d * d],
            EDGE_OUTPUT_GAIN,
            &mut rng,
        );
        let gru = Gru::new(&mut store, "gru", d, &mut rng);
        let gate_in = match config.readout {
            Readout::Concat => (config.steps + 1) * d,
            _ => 2 * d,
        };
        let i_net = FeedForward::new(&mut store, "readout_i", &[gate_in, w, w, out], 1.0, &mut rng);
        let j_net = FeedForward::new(&mut store, "readout_j", &[d, w, w, out], 1.0, &mut rng);
        let pooled = if config.strategy == JoinStrategy::Disjoint {
            2 * out
        } else {
            out
        };
        let head = Linear::new(&mut store, "head", pooled, 1, 1.0, &mut rng);
        Self {
            config,
            store,
            embed,
            edge_net,
            gru,
            i_net,
            j_net,
            head,
            normalizer: Normalizer::new(),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn embed(&self) -> &Linear {
        &self.embed
    }

    pub fn edge_net(&self) -> &FeedForward {
        &self.edge_net
    }

    pub fn gru(&self) -> &Gru {
        &self.gru
    }

    pub fn i_net(&self) -> &FeedForward {
        &self.i_net
    }

    pub fn j_net(&self) -> &FeedForward {
        &self.j_net
    }

    pub fn head(&self) -> &Linear {
        &self.head
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Fits the feature normalizer on the atom nodes of `samples`. A no-op
    /// when normalization is disabled.
    pub fn fit_normalizer(&mut self, samples: &[&ReactionSample]) -> Result<()> {
        if !self.config.normalize {
            return Ok(());
        }
        let features: Vec<Tensor> = samples
            .iter()
            .flat_map(|s| {
                [
                    crate::molgraph::featurize(&s.alcohol),
                    crate::molgraph::featurize(&s.acyl_halide),
                ]
            })
            .collect();
        self.normalizer.fit(&features)?;
        Ok(())
    }

    /// Joins and featurizes a sample. The global node's feature row stays
    /// zero under normalization.
    pub fn prepare_sample(&self, sample: &ReactionSample) -> Result<PreparedGraph> {
        let joined = sample.join(self.config.strategy);
        let mut features = joined.node_features.clone();
        if self.config.normalize {
            features = self.normalizer.apply(&features)?;
            if let Some(g) = joined.global_node {
                features.row_mut(g).fill(0.0);
            }
        }
        Ok(PreparedGraph::new(&joined, features))
    }

    /// Initial node states `h⁰ = x W + b`.
    pub fn embed_initial(&self, tape: &mut Tape, bound: &Bound, x: Var) -> Result<Var> {
        Ok(self.embed.forward(tape, bound, x, Activation::None)?)
    }

    /// Edge matrices for every row of `edge_types`, flattened row-major.
    pub fn edge_matrices(&self, tape: &mut Tape, bound: &Bound, edge_types: Var) -> Result<Var> {
        Ok(self.edge_net.forward(tape, bound, edge_types)?)
    }

    /// One message step followed by the GRU update.
    pub fn message_step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        h: Var,
        matrices: Var,
        batch: &GraphBatch,
    ) -> Result<Var> {
        let from = tape.gather_rows(h, &batch.src)?;
        let grouped = tape.segment_sum(from, &batch.group, batch.num_groups())?;
        let messages = tape.indexed_matvec(matrices, &batch.group_type, grouped)?;
        let m = tape.segment_sum(messages, &batch.group_dst, batch.num_nodes())?;
        let gru = self.gru.bind(bound);
        Ok(tape.gru_cell(h, m, &gru)?)
    }

    /// `σ(i(gate_input)) ⊙ j(h_T)` per row.
    fn gated(&self, tape: &mut Tape, bound: &Bound, gate_input: Var, h_t: Var) -> Result<Var> {
        let i = self.i_net.forward(tape, bound, gate_input)?;
        let gate = tape.sigmoid(i);
        let j = self.j_net.forward(tape, bound, h_t)?;
        Ok(tape.mul(gate, j)?)
    }

    /// Pooled embeddings, one row per segment (or per sample for the
    /// global-node readout). `states` holds `h⁰ … h^T`.
    pub fn readout(&self, tape: &mut Tape, bound: &Bound, states: &[Var], batch: &GraphBatch) -> Result<Var> {
        let (h0, ht) = (states[0], *states.last().expect("at least h0"));
        match self.config.readout {
            Readout::GatedSum => {
                let input = tape.concat_cols(&[ht, h0])?;
                let per_node = self.gated(tape, bound, input, ht)?;
                Ok(tape.segment_sum(per_node, &batch.segment, batch.num_segments)?)
            }
            Readout::GlobalNode => {
                let g = batch.global_nodes.as_ref().ok_or(ModelError::NoGlobalNode)?;
                let hg_t = tape.gather_rows(ht, g)?;
                let hg_0 = tape.gather_rows(h0, g)?;
                let input = tape.concat_cols(&[hg_t, hg_0])?;
                self.gated(tape, bound, input, hg_t)
            }
            Readout::Concat => {
                let input = tape.concat_cols(states)?;
                let per_node = self.gated(tape, bound, input, ht)?;
                Ok(tape.segment_sum(per_node, &batch.segment, batch.num_segments)?)
            }
        }
    }

    /// Predictions for a batch as a `B × 1` column, in normalized label units.
    pub fn forward_batch(&self, tape: &mut Tape, bound: &Bound, batch: &GraphBatch) -> Result<Var> {
        let x = tape.constant(batch.features.clone());
        let h0 = self.embed_initial(tape, bound, x)?;
        let types = tape.constant(batch.edge_types.clone());
        let matrices = self.edge_matrices(tape, bound, types)?;
        let mut states = vec![h0];
        for _ in 0..self.config.steps {
            let h = self.message_step(tape, bound, *states.last().expect("h0"), matrices, batch)?;
            states.push(h);
        }
        let mut pooled = self.readout(tape, bound, &states, batch)?;
        if self.pools_parts_separately() {
            let first: Vec<usize> = (0..batch.num_samples).map(|b| 2 * b).collect();
            let second: Vec<usize> = (0..batch.num_samples).map(|b| 2 * b + 1).collect();
            let a = tape.gather_rows(pooled, &first)?;
            let h = tape.gather_rows(pooled, &second)?;
            pooled = tape.concat_cols(&[a, h])?;
        }
        Ok(self.head.forward(tape, bound, pooled, Activation::None)?)
    }

    fn pools_parts_separately(&self) -> bool {
        self.config.strategy == JoinStrategy::Disjoint
    }

    pub fn batch(&self, graphs: &[&PreparedGraph]) -> Result<GraphBatch> {
        if let Some(g) = graphs.iter().find(|g| g.strategy != self.config.strategy) {
            return Err(ModelError::StrategyMismatch {
                expected: self.config.strategy,
                got: g.strategy,
            }
            .into());
        }
        Ok(GraphBatch::new(graphs, self.pools_parts_separately()))
    }

    /// Normalized-unit predictions for raw samples.
    pub fn predict_samples(&self, samples: &[&ReactionSample]) -> Result<Vec<f64>> {
        let prepared = samples
            .iter()
            .map(|s| self.prepare_sample(s))
            .collect::<Result<Vec<_>>>()?;
        self.predict(&prepared.iter().collect::<Vec<_>>())
    }
}

impl Regressor for Mpnn {
    type Input = PreparedGraph;

    fn label(&self) -> String {
        format!("MPNN {}", self.config.label())
    }

    fn fit_inputs(&mut self, train: &[&ReactionSample]) -> Result<()> {
        self.fit_normalizer(train)
    }

    fn prepare(&self, sample: &ReactionSample) -> Result<PreparedGraph> {
        self.prepare_sample(sample)
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn forward(&self, tape: &mut Tape, bound: &Bound, inputs: &[&PreparedGraph]) -> Result<Var> {
        let batch = self.batch(inputs)?;
        self.forward_batch(tape, bound, &batch)
    }
}
