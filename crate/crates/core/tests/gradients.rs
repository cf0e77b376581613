mod common;

use common::suites::{op_gradient_errors, yhat_gradient_errors};

#[test]
fn every_tape_operation_matches_finite_differences() {
    for (op, err) in op_gradient_errors(10) {
        assert!(err < 1e-4, "{op}: relative error {err:e}");
    }
}

#[test]
fn end_to_end_prediction_gradients_match_finite_differences() {
    let errors = yhat_gradient_errors(14);
    assert!(errors.len() >= 10);
    for (config, err) in errors {
        assert!(err < 1e-4, "{config}: relative error {err:e}");
    }
}
