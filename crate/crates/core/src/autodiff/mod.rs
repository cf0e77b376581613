//! Minimal reverse-mode automatic differentiation over dense `f64` matrices.
//!
//! The operation set is exactly what the message-passing network, its
//! readouts and the fingerprint MLP need: matrix products, broadcast bias
//! addition, elementwise arithmetic and activations, row gathers, segment
//! sums, per-row matrix–vector products (edge-conditioned messages), column
//! concatenation and an MSE loss.
//!
//! A [`Tape`] is built fresh for every forward pass and supports a single
//! [`Tape::backward`]. Gradients accumulate in reverse recording order, so two
//! identical forward/backward passes produce bit-identical gradients.
//!
//! ```
//! use dgnn::autodiff::{Activation, Tape, Tensor};
//!
//! let mut tape = Tape::new();
//! let x = tape.constant(Tensor::from_rows(&[[1.0, 2.0]]).unwrap());
//! let w = tape.leaf(Tensor::from_rows(&[[3.0], [4.0]]).unwrap());
//! let b = tape.leaf(Tensor::scalar(0.5));
//! let y = tape.dense(x, w, b, Activation::None).unwrap();
//! let loss = tape.sum(y);
//! assert_eq!(tape.value(loss).item(), Some(11.5));
//!
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(w).unwrap().data(), &[1.0, 2.0]);
//! ```

mod params;
mod tape;
mod tensor;

pub mod gradcheck;

pub use params::{Bound, ParamId, ParamStore};
pub use tape::{Activation, Gradients, GruVars, Tape, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AutodiffError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("tensor of shape {rows}x{cols} cannot hold {len} values")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("rows have differing lengths")]
    RaggedRows,
    #[error("index {index} out of range for {bound} rows/segments")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("segment list has {segments} entries for {rows} rows")]
    SegmentCount { rows: usize, segments: usize },
    #[error("backward requires a scalar loss, got shape {shape:?}")]
    NonScalarLoss { shape: (usize, usize) },
    #[error("tape already consumed by a backward pass")]
    TapeReused,
}
