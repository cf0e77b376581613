//! The ten acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 5 to 7 train real models and dominate the runtime. They use the
//! reduced "desk" settings from `configs/desk.conf` (hidden width 16, edge and
//! readout MLP width 32, 300 epochs), since the full-size defaults take hours
//! on one core. Exits nonzero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::suites::{
    four_point_example, metric_max_error, op_gradient_errors, oracle_max_error, permutation_max_change,
    yhat_gradient_errors,
};
use dgnn::baseline::MlpConfig;
use dgnn::dataset::{
    split, DatasetManifest, MoleculeLibrary, PairConstraints, Split, SplitFractions, SplitProtocol, SyntheticLabeler,
};
use dgnn::hash::rng_for;
use dgnn::molgraph::JoinStrategy;
use dgnn::mpnn::{Checkpoint, ModelConfig, Readout};
use dgnn::trainkit::{
    detect_outliers, experiment1_methods, run_experiment, ExperimentConfig, ExperimentResult, Metrics, ModelSpec,
    OutlierPolicy, TrainConfig,
};
use rand::seq::index::sample;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn toy() -> DatasetManifest {
    DatasetManifest::generate(
        &MoleculeLibrary::toy(),
        &PairConstraints::default(),
        &SyntheticLabeler::new(0, 1.0),
    )
}

fn desk_model(strategy: JoinStrategy) -> ModelConfig {
    let mut c = ModelConfig::new(strategy, Readout::GatedSum).with_hidden_dim(16);
    c.mlp_width = 32;
    c
}

fn desk_train() -> TrainConfig {
    TrainConfig {
        epochs: 300,
        patience: Some(50),
        ..TrainConfig::default()
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let ops = op_gradient_errors(10);
    let yhat = yhat_gradient_errors(14);
    let worst_op = ops.iter().map(|x| x.1).fold(0.0, f64::max);
    let worst_yhat = yhat.iter().map(|x| x.1).fold(0.0, f64::max);
    let elapsed = t.elapsed();
    outcome(
        worst_op < 1e-4 && worst_yhat < 1e-4 && yhat.len() >= 10 && within(elapsed, 120),
        format!(
            "{} ops x 10 configs worst {worst_op:.1e}; y-hat x {} configs worst {worst_yhat:.1e}; {elapsed:.1?}",
            ops.len(),
            yhat.len()
        ),
    )
}

fn oracle() -> Outcome {
    let t = Instant::now();
    let worst = oracle_max_error(20);
    let elapsed = t.elapsed();
    outcome(
        worst < 1e-10 && within(elapsed, 60),
        format!("20 seeds, worst gap {worst:.1e}; {elapsed:.1?}"),
    )
}

fn permutation() -> Outcome {
    let per = permutation_max_change(50);
    let pass = per.iter().all(|x| x.1 < 1e-6);
    let detail = per
        .iter()
        .map(|(s, e)| format!("{s} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("50 relabelings per strategy, worst change: {detail}"))
}

fn overfit() -> Outcome {
    let full = split(&toy(), SplitProtocol::Random, SplitFractions::default(), 0).expect("toy split");
    let mut m = full.clone();
    m.samples = full.samples_in(Split::Train).into_iter().take(64).cloned().collect();
    m.normalize_labels().expect("labels vary");
    let spec = ModelSpec::Mpnn(desk_model(JoinStrategy::GlobalNode));
    let cfg = TrainConfig {
        epochs: 2000,
        batch_size: 16,
        learning_rate: 3e-3,
        patience: None,
        stop_below: Some(1e-4),
        ..TrainConfig::default()
    };
    let t = Instant::now();
    let (model, report) = dgnn::trainkit::fit(&spec, &m, &cfg).expect("training runs");
    let mse = model.evaluate(&m, Split::Train).expect("evaluates").rmse.powi(2);
    let elapsed = t.elapsed();
    outcome(
        mse < 1e-3 && within(elapsed, 300),
        format!(
            "64 samples, train MSE {mse:.2e} after {} epochs; {elapsed:.1?}",
            report.log.len()
        ),
    )
}

fn mean(r: &ExperimentResult, method: &str, s: Split) -> Metrics {
    r.mean(method, s).unwrap_or_else(|| panic!("no runs for {method}"))
}

fn experiment(protocol: SplitProtocol, methods: Vec<ModelSpec>) -> ExperimentResult {
    let cfg = ExperimentConfig {
        seeds: vec![0, 1, 2],
        fractions: SplitFractions::default(),
        train: desk_train(),
        methods,
    };
    run_experiment(&toy(), protocol, &cfg).expect("experiment runs")
}

fn ordering(exp1: &ExperimentResult) -> Outcome {
    print!("{}", exp1.to_csv());
    let rmse = |m: &str| mean(exp1, m, Split::Test).rmse;
    let r2 = |m: &str| mean(exp1, m, Split::Test).r2;
    let (gn, fc, dg) = (rmse("MPNN GN"), rmse("MPNN FC"), rmse("MPNN DG"));
    outcome(
        gn <= fc && fc <= dg && r2("MPNN GN") > r2("MLP"),
        format!(
            "test RMSE GN {gn:.4} FC {fc:.4} DG {dg:.4}; test r2 GN {:.4} MLP {:.4} (desk settings)",
            r2("MPNN GN"),
            r2("MLP")
        ),
    )
}

fn generalization(exp1: &ExperimentResult, exp2: &ExperimentResult) -> Outcome {
    print!("{}", exp2.to_csv());
    let random = mean(exp1, "MPNN GN", Split::Test).r2;
    let lao = mean(exp2, "MPNN GN", Split::Test).r2;
    outcome(
        random - lao >= 0.02,
        format!(
            "GN test r2 random {random:.4}, leave-alcohol-out {lao:.4}, drop {:.4}",
            random - lao
        ),
    )
}

fn outliers() -> Outcome {
    let mut m = toy();
    let y: Vec<f64> = m.samples.iter().map(|s| s.label).collect();
    let mu = y.iter().sum::<f64>() / y.len() as f64;
    let sd = (y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    let n_bad = (m.len() as f64 * 0.01).ceil() as usize;
    let bad: Vec<usize> = sample(&mut rng_for(7, "corrupt"), m.len(), n_bad).into_vec();
    for &i in &bad {
        m.samples[i].label += 10.0 * sd;
    }
    let bad_ids: Vec<usize> = bad.iter().map(|&i| m.samples[i].id).collect();
    let spec = ModelSpec::Mpnn(desk_model(JoinStrategy::GlobalNode));
    let report = detect_outliers(&m, &spec, &desk_train(), &OutlierPolicy::default(), 3).expect("detection runs");
    let hits = report.outliers.iter().filter(|o| bad_ids.contains(&o.id)).count();
    let false_pos = report.outliers.len() - hits;
    let recall = hits as f64 / bad_ids.len() as f64;
    let fp_rate = false_pos as f64 / (m.len() - bad_ids.len()) as f64;
    outcome(
        recall >= 0.95 && fp_rate < 0.02,
        format!(
            "{n_bad} corrupted: recovered {hits}, {false_pos} clean flagged ({:.2}%), {} iterations",
            100.0 * fp_rate,
            report.iterations.len()
        ),
    )
}

fn metrics() -> Outcome {
    let worst = metric_max_error();
    let m = four_point_example();
    let exact = m.rmse == 0.5 && m.mae == 0.25 && m.r2 == 0.8;
    outcome(
        worst < 1e-12 && exact,
        format!(
            "evaluate vs reference worst {worst:.1e}; 4-point RMSE {} MAE {} r2 {}",
            m.rmse, m.mae, m.r2
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str, threads: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_dgnn"))
            .args([
                "exp1",
                "--seed",
                "11",
                "--threads",
                threads,
                "--repeats",
                "2",
                "--epochs",
                "15",
            ])
            .args([
                "--hidden-dim",
                "8",
                "--mlp-width",
                "16",
                "--mlp-hidden",
                "64,16",
                "--fp-bits",
                "256",
            ])
            .arg("--out")
            .arg(&out)
            .status()
            .expect("dgnn runs");
        assert!(status.success(), "exp1 failed");
        std::fs::read(&out).expect("csv written")
    };
    let (a, b, c) = (run("a.csv", "1"), run("b.csv", "1"), run("c.csv", "3"));
    outcome(
        a == b && a == c && !a.is_empty(),
        format!(
            "exp1 twice with seed 11 ({} bytes): identical {}; with 3 threads: identical {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn serialization() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut m = split(&toy(), SplitProtocol::Random, SplitFractions::default(), 4).expect("toy split");
    m.normalize_labels().expect("labels vary");
    let path = dir.path().join("m.jsonl");
    m.save(&path).expect("manifest saves");
    let back = DatasetManifest::load(&path).expect("manifest loads");
    let manifest_ok = back.to_jsonl() == m.to_jsonl()
        && back.label_stats == m.label_stats
        && back.samples.iter().zip(&m.samples).all(|(a, b)| {
            a.label.to_bits() == b.label.to_bits()
                && a.split == b.split
                && a.alcohol == b.alcohol
                && a.acyl_halide == b.acyl_halide
        });

    let quick = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let mut gn = ModelConfig::new(JoinStrategy::GlobalNode, Readout::Concat).with_hidden_dim(8);
    gn.normalize = true;
    let mlp = MlpConfig {
        nbits: 256,
        hidden: vec![32, 8],
        ..MlpConfig::default()
    };
    let test = m.samples_in(Split::Test);
    let mut models_ok = true;
    for spec in [ModelSpec::Mpnn(gn), ModelSpec::Mlp(mlp)] {
        let (model, _) = dgnn::trainkit::fit(&spec, &m, &quick).expect("training runs");
        let ckpt = dir.path().join("model.json");
        Checkpoint::new(model.clone(), m.label_stats)
            .save(&ckpt)
            .expect("checkpoint saves");
        let loaded = Checkpoint::load(&ckpt).expect("checkpoint loads");
        let before = model.predict_samples(&test).expect("predicts");
        let after = loaded.model.predict_samples(&test).expect("predicts");
        models_ok &=
            before.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits()) && loaded.label_stats == m.label_stats;
    }
    outcome(
        manifest_ok && models_ok,
        format!("manifest lossless {manifest_ok}; MPNN and MLP checkpoints reproduce y-hat bit-exactly {models_ok}"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id, name, o: Outcome| {
        println!(
            "criterion {id:>2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };
    record(1, "gradient suite", gradients());
    record(2, "oracle equivalence", oracle());
    record(3, "permutation invariance", permutation());
    record(4, "overfit smoke test", overfit());
    let template = desk_model(JoinStrategy::GlobalNode);
    let exp1 = experiment(
        SplitProtocol::Random,
        experiment1_methods(&template, &MlpConfig::default()),
    );
    record(5, "join-strategy ordering", ordering(&exp1));
    let exp2 = experiment(SplitProtocol::LeaveAlcoholOut, vec![ModelSpec::Mpnn(template)]);
    record(6, "leave-alcohol-out is harder", generalization(&exp1, &exp2));
    record(7, "outlier recovery", outliers());
    record(8, "metric correctness", metrics());
    record(9, "determinism", determinism());
    record(10, "serialization", serialization());

    println!();
    for (id, name, o) in &results {
        println!("{} criterion {id}: {name}", if o.pass { "PASS" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
