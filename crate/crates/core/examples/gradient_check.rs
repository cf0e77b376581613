//! Finite-difference check of a small dense layer followed by a GRU cell.

use dgnn::autodiff::gradcheck::check_gradients;
use dgnn::autodiff::{Activation, GruVars, Tensor};
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut t = |r: usize, c: usize| Tensor::new(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let (n, d) = (3, 4);
    let mut inputs = vec![t(n, 5), t(5, d), t(1, d), t(n, d)];
    for _ in 0..3 {
        inputs.extend([t(d, d), t(d, d), t(1, d)]);
    }
    let report = check_gradients(&inputs, 1e-6, |tape, v| {
        let m = tape.dense(v[0], v[1], v[2], Activation::Tanh)?;
        let p = GruVars {
            w_z: v[4],
            u_z: v[5],
            b_z: v[6],
            w_r: v[7],
            u_r: v[8],
            b_r: v[9],
            w_h: v[10],
            u_h: v[11],
            b_h: v[12],
        };
        let h = tape.gru_cell(v[3], m, &p)?;
        let sq = tape.mul(h, h)?;
        Ok(tape.sum(sq))
    })?;
    for (i, e) in report.per_input.iter().enumerate() {
        println!("input {i:>2}: relative error {e:.2e}");
    }
    println!(
        "worst {:.2e}, passes 1e-4: {}",
        report.max_rel_error,
        report.passes(1e-4)
    );
    Ok(())
}
