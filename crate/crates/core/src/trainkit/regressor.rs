use rayon::prelude::*;

use crate::autodiff::{Bound, ParamStore, Tape, Var};
use crate::dataset::ReactionSample;
use crate::error::Result;

/// A trainable model mapping reaction samples to one scalar each.
///
/// Inputs are prepared once per sample (joins, features, fingerprints) and
/// batched by [`Regressor::forward`].
pub trait Regressor: Send + Sync {
    type Input: Send + Sync;

    /// Name used in logs and result tables.
    fn label(&self) -> String;

    /// Fits input preprocessing (e.g. feature normalization) on training
    /// samples. Called once before any input is prepared.
    fn fit_inputs(&mut self, train: &[&ReactionSample]) -> Result<()>;

    fn prepare(&self, sample: &ReactionSample) -> Result<Self::Input>;

    fn store(&self) -> &ParamStore;

    fn store_mut(&mut self) -> &mut ParamStore;

    /// Predictions for `inputs` as a `B × 1` column.
    fn forward(&self, tape: &mut Tape, bound: &Bound, inputs: &[&Self::Input]) -> Result<Var>;

    /// Gradient-free predictions, one per input.
    fn predict(&self, inputs: &[&Self::Input]) -> Result<Vec<f64>> {
        predict_chunked(self, inputs)
    }
}

/// Rows per forward pass when predicting without gradients.
const PREDICT_CHUNK: usize = 64;

/// Runs `forward` on chunks in parallel. Each output depends only on its own
/// input, so results do not depend on chunking or thread count.
fn predict_chunked<R: Regressor + ?Sized>(model: &R, inputs: &[&R::Input]) -> Result<Vec<f64>> {
    let chunks: Vec<Vec<f64>> = inputs
        .par_chunks(PREDICT_CHUNK)
        .map(|chunk| {
            let mut tape = Tape::new();
            let bound = model.store().bind_constants(&mut tape);
            let y = model.forward(&mut tape, &bound, chunk)?;
            Ok(tape.value(y).data().to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(chunks.concat())
}
