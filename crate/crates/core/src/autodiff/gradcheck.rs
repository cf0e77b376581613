//! Central finite-difference checks of tape gradients.
//!
//! The numeric side only ever evaluates the forward pass, so it is
//! independent of every backward rule it checks.

use super::{AutodiffError, Tape, Tensor, Var};

/// Outcome of a gradient check over a set of input tensors.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest per-input relative error.
    pub max_rel_error: f64,
    /// Relative error for each input, in input order.
    pub per_input: Vec<f64>,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Relative error `‖a − n‖ / max(‖a‖, ‖n‖)`; zero when both are (near) zero.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum::<f64>()
        .sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Compares the tape gradient of the scalar built by `f` against central
/// differences with step `step` for every entry of every input.
pub fn check_gradients<F>(inputs: &[Tensor], step: f64, f: F) -> Result<GradCheckReport, AutodiffError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, AutodiffError>,
{
    let eval = |inputs: &[Tensor]| -> Result<f64, AutodiffError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        let shape = tape.shape(out);
        tape.value(out).item().ok_or(AutodiffError::NonScalarLoss { shape })
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    let grads = tape.backward(out)?;

    let mut per_input = Vec::with_capacity(inputs.len());
    let mut probe = inputs.to_vec();
    for (k, input) in inputs.iter().enumerate() {
        let analytic = grads.get_or_zeros(vars[k], input.shape());
        let mut numeric = vec![0.0; input.len()];
        for i in 0..input.len() {
            let orig = input.data()[i];
            probe[k].data_mut()[i] = orig + step;
            let plus = eval(&probe)?;
            probe[k].data_mut()[i] = orig - step;
            let minus = eval(&probe)?;
            probe[k].data_mut()[i] = orig;
            numeric[i] = (plus - minus) / (2.0 * step);
        }
        per_input.push(relative_error(analytic.data(), &numeric));
    }
    let max_rel_error = per_input.iter().copied().fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_rel_error,
        per_input,
    })
}
