//! Message-passing neural networks that learn joint representations of
//! disjoint molecular graphs.
//!
//! Each sample is an ordered pair of reactant molecules (an alcohol and an
//! acyl halide) with one scalar reaction-energy label. The crate covers the
//! whole pipeline:
//!
//! - [`autodiff`]: a small reverse-mode AD tape over dense matrices.
//! - [`molgraph`]: molecules, featurization, the disjoint / fully connected /
//!   global-node joins, node-feature normalization.
//! - [`mpnn`]: edge-network messages, GRU updates, gated-sum, global-node and
//!   concatenation readouts, checkpoints.
//! - [`baseline`]: circular fingerprints and an MLP on their concatenation.
//! - [`dataset`]: the shipped molecule library, combinatorial pairing, a
//!   synthetic label generator, split protocols and the JSONL manifest.
//! - [`trainkit`]: Adam training with early stopping, metrics, the two
//!   experiment drivers and iterative residual-based outlier removal.
//! - [`cli`]: the `dgnn` command line.

pub mod autodiff;
pub mod baseline;
pub mod cli;
pub mod dataset;
mod error;
pub mod hash;
pub mod molgraph;
pub mod mpnn;
pub mod nn;
pub mod trainkit;

pub use error::{Error, Result};
