//! End-to-end runs of the `dgnn` binary with tiny settings.

use std::path::Path;
use std::process::{Command, Output};

fn dgnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgnn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("dgnn runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dgnn(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const TINY: &[&str] = &["--epochs", "3", "--hidden-dim", "4", "--mlp-width", "8"];

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["gen", "--out", "all.jsonl", "--seed", "2", "--histogram", "hist.dat"],
    );
    assert_eq!(
        std::fs::read_to_string(d.join("all.jsonl")).unwrap().lines().count(),
        360
    );
    assert_eq!(std::fs::read_to_string(d.join("hist.dat")).unwrap().lines().count(), 41);

    ok(
        d,
        &[
            "split",
            "--in",
            "all.jsonl",
            "--out",
            "lao.jsonl",
            "--protocol",
            "leave-alcohol-out",
        ],
    );
    let mut args = vec![
        "train",
        "--in",
        "lao.jsonl",
        "--out",
        "gn.json",
        "--readout",
        "cr",
        "--norm",
        "--log",
        "log.jsonl",
    ];
    args.extend(TINY);
    let table = ok(d, &args);
    assert!(table.starts_with("method,split,r2,rmse,sre,mae\nMPNN GN+Norm+CR,train,"));
    assert_eq!(std::fs::read_to_string(d.join("log.jsonl")).unwrap().lines().count(), 3);

    let eval = ok(
        d,
        &[
            "eval",
            "--ckpt",
            "gn.json",
            "--in",
            "lao.jsonl",
            "--split",
            "test",
            "--scatter",
            "sc.dat",
        ],
    );
    let test_row = table.lines().find(|l| l.contains(",test,")).unwrap();
    assert_eq!(eval.lines().nth(1).unwrap(), test_row);
    assert!(std::fs::read_to_string(d.join("sc.dat")).unwrap().lines().count() > 1);

    let base = ok(
        d,
        &[
            "baseline",
            "--in",
            "lao.jsonl",
            "--out",
            "mlp.json",
            "--epochs",
            "2",
            "--mlp-hidden",
            "16,4",
            "--fp-bits",
            "128",
        ],
    );
    assert!(base.contains("MLP,test,"));

    let mut args = vec![
        "outliers",
        "--in",
        "all.jsonl",
        "--max-iters",
        "1",
        "--folds",
        "2",
        "--out",
        "clean.jsonl",
    ];
    args.extend(TINY);
    let report = ok(d, &args);
    assert!(report.starts_with("id,iteration,residual\n"));
    assert!(d.join("clean.jsonl").exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.conf"),
        "epochs = 2\nhidden_dim = 4\nmlp_width = 8\nstrategy = dg\n",
    )
    .unwrap();
    ok(d, &["gen", "--out", "all.jsonl"]);
    ok(d, &["split", "--in", "all.jsonl"]);
    let table = ok(
        d,
        &[
            "--config",
            "run.conf",
            "train",
            "--in",
            "all.jsonl",
            "--out",
            "m.json",
            "--log",
            "log.jsonl",
        ],
    );
    assert!(table.contains("MPNN DG,"));
    assert_eq!(std::fs::read_to_string(d.join("log.jsonl")).unwrap().lines().count(), 2);
    let table = ok(
        d,
        &[
            "--config",
            "run.conf",
            "train",
            "--in",
            "all.jsonl",
            "--out",
            "m.json",
            "--strategy",
            "fc",
        ],
    );
    assert!(table.contains("MPNN FC,"));
}

#[test]
fn failures_print_one_parsable_line_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dgnn(dir.path(), &["eval", "--ckpt", "missing.json", "--in", "missing.jsonl"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind=io message="));

    ok(dir.path(), &["gen", "--out", "all.jsonl"]);
    let out = dgnn(
        dir.path(),
        &[
            "train",
            "--in",
            "all.jsonl",
            "--out",
            "m.json",
            "--strategy",
            "fc",
            "--readout",
            "gr",
        ],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error kind=model"));
}
