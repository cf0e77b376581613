//! Checks shared by the topic tests and the acceptance target. Each returns
//! the worst error it saw so callers can both assert and report.

use dgnn::autodiff::gradcheck::{check_gradients, relative_error};
use dgnn::autodiff::{Activation, AutodiffError, Bound, GruVars, Tape, Tensor, Var};
use dgnn::dataset::{
    split, DatasetManifest, LabelStats, MoleculeLibrary, PairConstraints, ReactionSample, Split, SplitFractions,
    SplitProtocol, SyntheticLabeler,
};
use dgnn::molgraph::JoinStrategy;
use dgnn::mpnn::{ModelConfig, Mpnn, Readout};
use dgnn::trainkit::{Metrics, Regressor};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{oracle_predict, random_sample, rng};

/// Every valid (strategy, readout) pair.
pub fn variants() -> Vec<(JoinStrategy, Readout)> {
    let mut out = Vec::new();
    for s in JoinStrategy::ALL {
        for r in Readout::ALL {
            if r != Readout::GlobalNode || s == JoinStrategy::GlobalNode {
                out.push((s, r));
            }
        }
    }
    out
}

pub fn small_model(strategy: JoinStrategy, readout: Readout, normalize: bool, steps: usize, seed: u64) -> Mpnn {
    let mut c = ModelConfig::new(strategy, readout).with_hidden_dim(3);
    c.mlp_width = 4;
    c.steps = steps;
    c.normalize = normalize;
    c.seed = seed;
    Mpnn::new(c).expect("valid config")
}

fn random_tensor(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// `Σ c ⊙ out` with fixed random `c`, so every output entry matters.
fn weighted_sum(tape: &mut Tape, out: Var, seed: u64) -> Result<Var, AutodiffError> {
    let (r, c) = tape.shape(out);
    let w = tape.constant(random_tensor(&mut rng(seed), r, c));
    let p = tape.mul(out, w)?;
    Ok(tape.sum(p))
}

type OpCase = (
    &'static str,
    Vec<Tensor>,
    Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var, AutodiffError>>,
);

/// One random configuration of every differentiable tape operation.
fn op_cases(seed: u64) -> Vec<OpCase> {
    let mut g = rng(seed);
    let n = g.gen_range(1..5);
    let d = g.gen_range(1..4);
    let k = g.gen_range(1..4);
    let segments = g.gen_range(1..4);
    let seg: Vec<usize> = (0..n).map(|_| g.gen_range(0..segments)).collect();
    let gather: Vec<usize> = (0..g.gen_range(1..6)).map(|_| g.gen_range(0..n)).collect();
    let table_rows = g.gen_range(1..3);
    let which: Vec<usize> = (0..n).map(|_| g.gen_range(0..table_rows)).collect();
    let targets = random_tensor(&mut g, n, d);
    let mut t = |r, c| random_tensor(&mut g, r, c);
    let unary = |f: fn(&mut Tape, Var) -> Var| -> Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var, AutodiffError>> {
        Box::new(move |tp, v| {
            let y = f(tp, v[0]);
            weighted_sum(tp, y, seed)
        })
    };
    let mut cases: Vec<OpCase> = vec![
        (
            "matmul",
            vec![t(n, d), t(d, k)],
            Box::new(move |tp, v| {
                let y = tp.matmul(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "add_row",
            vec![t(n, d), t(1, d)],
            Box::new(move |tp, v| {
                let y = tp.add_row(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "add",
            vec![t(n, d), t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.add(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "sub",
            vec![t(n, d), t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.sub(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "mul",
            vec![t(n, d), t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.mul(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        ("scale", vec![t(n, d)], unary(|tp, x| tp.scale(x, -1.7))),
        ("one_minus", vec![t(n, d)], unary(|tp, x| tp.one_minus(x))),
        ("relu", vec![t(n, d)], unary(|tp, x| tp.relu(x))),
        ("sigmoid", vec![t(n, d)], unary(|tp, x| tp.sigmoid(x))),
        ("tanh", vec![t(n, d)], unary(|tp, x| tp.tanh(x))),
        (
            "gather_rows",
            vec![t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.gather_rows(v[0], &gather)?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "segment_sum",
            vec![t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.segment_sum(v[0], &seg, segments)?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "row_matvec",
            vec![t(n, d * d), t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.row_matvec(v[0], v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "indexed_matvec",
            vec![t(table_rows, d * d), t(n, d)],
            Box::new(move |tp, v| {
                let y = tp.indexed_matvec(v[0], &which, v[1])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        (
            "concat_cols",
            vec![t(n, d), t(n, k)],
            Box::new(move |tp, v| {
                let y = tp.concat_cols(&[v[0], v[1], v[0]])?;
                weighted_sum(tp, y, seed)
            }),
        ),
        ("sum", vec![t(n, d)], Box::new(|tp, v| Ok(tp.sum(v[0])))),
        ("mse", vec![t(n, d)], Box::new(move |tp, v| tp.mse(v[0], &targets))),
        (
            "gru_cell",
            {
                let mut v = vec![t(n, d), t(n, d)];
                for _ in 0..3 {
                    v.extend([t(d, d), t(d, d), t(1, d)]);
                }
                v
            },
            Box::new(move |tp, v| {
                let p = GruVars {
                    w_z: v[2],
                    u_z: v[3],
                    b_z: v[4],
                    w_r: v[5],
                    u_r: v[6],
                    b_r: v[7],
                    w_h: v[8],
                    u_h: v[9],
                    b_h: v[10],
                };
                let y = tp.gru_cell(v[0], v[1], &p)?;
                weighted_sum(tp, y, seed)
            }),
        ),
    ];
    for (name, act) in [
        ("dense/none", Activation::None),
        ("dense/relu", Activation::Relu),
        ("dense/sigmoid", Activation::Sigmoid),
        ("dense/tanh", Activation::Tanh),
    ] {
        cases.push((
            name,
            vec![t(n, d), t(d, k), t(1, k)],
            Box::new(move |tp, v| {
                let y = tp.dense(v[0], v[1], v[2], act)?;
                weighted_sum(tp, y, seed)
            }),
        ));
    }
    cases
}

/// Worst relative error per operation over `configs` random configurations.
pub fn op_gradient_errors(configs: u64) -> Vec<(&'static str, f64)> {
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    for seed in 0..configs {
        for (name, inputs, f) in op_cases(1000 + seed) {
            let report = check_gradients(&inputs, 1e-6, |tp, v| f(tp, v)).expect("gradient check runs");
            match worst.iter_mut().find(|(n, _)| *n == name) {
                Some((_, e)) => *e = e.max(report.max_rel_error),
                None => worst.push((name, report.max_rel_error)),
            }
        }
    }
    worst
}

fn perturb_all(model: &mut Mpnn, seed: u64) {
    let mut g = rng(seed);
    for t in model.store_mut().tensors_mut() {
        t.data_mut().iter_mut().for_each(|v| *v += g.gen_range(-0.2..0.2));
    }
}

fn fitted(model: &mut Mpnn, samples: &[ReactionSample]) {
    let refs: Vec<&ReactionSample> = samples.iter().collect();
    model.fit_normalizer(&refs).expect("normalizer fits");
}

/// `Σ c_b ŷ_b` over a small batch, differentiated with respect to every
/// network parameter.
fn yhat_gradient_error(model: &Mpnn, samples: &[ReactionSample], seed: u64) -> f64 {
    let prepared: Vec<_> = samples.iter().map(|s| model.prepare_sample(s).unwrap()).collect();
    let refs: Vec<_> = prepared.iter().collect();
    let objective = |m: &Mpnn, tape: &mut Tape, bound: &Bound| -> Var {
        let y = m.forward(tape, bound, &refs).unwrap();
        weighted_sum(tape, y, seed).unwrap()
    };
    let mut tape = Tape::new();
    let bound = model.store().bind(&mut tape);
    let out = objective(model, &mut tape, &bound);
    let grads = tape.backward(out).unwrap();
    let analytic: Vec<f64> = model
        .store()
        .gradients(&bound, &grads)
        .iter()
        .flat_map(|t| t.data().to_vec())
        .collect();

    let eval = |m: &Mpnn| -> f64 {
        let mut tape = Tape::new();
        let bound = m.store().bind_constants(&mut tape);
        let out = objective(m, &mut tape, &bound);
        tape.value(out).item().unwrap()
    };
    let mut probe = model.clone();
    let mut numeric = Vec::with_capacity(analytic.len());
    let h = 1e-6;
    for p in 0..model.store().len() {
        for i in 0..model.store().tensors()[p].len() {
            let orig = probe.store().tensors()[p].data()[i];
            probe.store_mut().tensors_mut()[p].data_mut()[i] = orig + h;
            let plus = eval(&probe);
            probe.store_mut().tensors_mut()[p].data_mut()[i] = orig - h;
            let minus = eval(&probe);
            probe.store_mut().tensors_mut()[p].data_mut()[i] = orig;
            numeric.push((plus - minus) / (2.0 * h));
        }
    }
    relative_error(&analytic, &numeric)
}

/// Worst end-to-end relative error over `configs` random model
/// configurations, cycling through every variant with and without
/// normalization.
pub fn yhat_gradient_errors(configs: usize) -> Vec<(String, f64)> {
    let variants = variants();
    (0..configs)
        .map(|c| {
            let (s, r) = variants[c % variants.len()];
            let normalize = (c / variants.len()) % 2 == 1;
            let steps = 1 + c % 3;
            let mut g = rng(500 + c as u64);
            let samples: Vec<ReactionSample> = (0..2).map(|i| random_sample(&mut g, i, 3)).collect();
            let mut model = small_model(s, r, normalize, steps, c as u64);
            fitted(&mut model, &samples);
            perturb_all(&mut model, 900 + c as u64);
            (
                model.config().label() + &format!(" T={steps}"),
                yhat_gradient_error(&model, &samples, c as u64),
            )
        })
        .collect()
}

/// Worst gap between batched predictions and the per-edge loop oracle.
/// Molecules are small enough that joined graphs have at most 6 nodes.
pub fn oracle_max_error(seeds: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let mut g = rng(seed);
        for (i, (s, r)) in variants().into_iter().enumerate() {
            let max_atoms = if s == JoinStrategy::GlobalNode { 2 } else { 3 };
            let samples: Vec<ReactionSample> = (0..4).map(|k| random_sample(&mut g, k, max_atoms)).collect();
            let steps = g.gen_range(1..4);
            let mut model = small_model(s, r, g.gen_bool(0.5), steps, seed * 31 + i as u64);
            fitted(&mut model, &samples);
            perturb_all(&mut model, seed * 17 + i as u64);
            let refs: Vec<&ReactionSample> = samples.iter().collect();
            let batched = model.predict_samples(&refs).unwrap();
            for (sample, b) in samples.iter().zip(&batched) {
                worst = worst.max((oracle_predict(&model, sample) - b).abs());
            }
        }
    }
    worst
}

/// Relabels the atoms of both molecules at random.
pub fn permuted_sample(sample: &ReactionSample, rng: &mut impl Rng) -> ReactionSample {
    let shuffle = |n: usize, rng: &mut dyn rand::RngCore| {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    };
    let pa = shuffle(sample.alcohol.num_atoms(), rng);
    let ph = shuffle(sample.acyl_halide.num_atoms(), rng);
    let mut out = sample.clone();
    out.alcohol = sample.alcohol.permuted(&pa).unwrap();
    out.acyl_halide = sample.acyl_halide.permuted(&ph).unwrap();
    out
}

/// Worst change of ŷ under `cases` random relabelings, per strategy.
pub fn permutation_max_change(cases: u64) -> Vec<(JoinStrategy, f64)> {
    JoinStrategy::ALL
        .iter()
        .map(|&s| {
            let mut worst: f64 = 0.0;
            let mut g = rng(77 + s as u64);
            for case in 0..cases {
                let readouts: Vec<Readout> = variants().into_iter().filter(|v| v.0 == s).map(|v| v.1).collect();
                let r = readouts[case as usize % readouts.len()];
                let sample = random_sample(&mut g, 0, 6);
                let moved = permuted_sample(&sample, &mut g);
                let mut model = small_model(s, r, case % 2 == 1, 3, case);
                fitted(&mut model, std::slice::from_ref(&sample));
                perturb_all(&mut model, case);
                let a = model.predict_samples(&[&sample]).unwrap()[0];
                let b = model.predict_samples(&[&moved]).unwrap()[0];
                worst = worst.max((a - b).abs());
            }
            (s, worst)
        })
        .collect()
}

/// Textbook metric formulas, written independently of `Metrics::compute`.
pub fn reference_metrics(pred: &[f64], y: &[f64]) -> [f64; 4] {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sq: Vec<f64> = pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).collect();
    let ss_res: f64 = sq.iter().sum();
    let ss_tot: f64 = y.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let rmse = (ss_res / n).sqrt();
    let sre = pred
        .iter()
        .zip(y)
        .map(|(p, t)| ((p - t) / (t.abs() + 1e-8)).powi(2))
        .sum::<f64>()
        / n;
    let mae = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    [r2, rmse, sre, mae]
}

/// Worst gap between `evaluate` on a random model and the reference
/// formulas applied to the model's own predictions.
pub fn metric_max_error() -> f64 {
    let toy = DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::default(),
    );
    let mut manifest = split(&toy, SplitProtocol::Random, SplitFractions::default(), 3).unwrap();
    let stats: LabelStats = manifest.normalize_labels().unwrap();
    let model = small_model(JoinStrategy::GlobalNode, Readout::GatedSum, false, 2, 1);
    let got = dgnn::trainkit::evaluate(&model, &manifest, Split::Test).unwrap();
    let test = manifest.samples_in(Split::Test);
    let pred = model.predict_samples(&test).unwrap();
    let y: Vec<f64> = test.iter().map(|s| stats.normalize(s.label)).collect();
    let want = reference_metrics(&pred, &y);
    [got.r2, got.rmse, got.sre, got.mae]
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// The hand-worked example: errors (0, 0, 0, 1) on targets (1, 2, 3, 4).
pub fn four_point_example() -> Metrics {
    Metrics::compute(&[1.0, 2.0, 3.0, 5.0], &[1.0, 2.0, 3.0, 4.0]).unwrap()
}
