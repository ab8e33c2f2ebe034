use std::process::Command;

use gspline::cli::run;

fn gspline(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gspline")).args(args).output().unwrap()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(["gspline", "frobnicate"]), 2);
    let out = gspline(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(run(["gspline", "verify", "--suite", "nope"]), 2);
}

#[test]
fn pou_suite_passes() {
    let out = gspline(&["verify", "--suite", "pou"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true);
    }
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn failing_check_exits_with_one() {
    // a 2-center degree-3 circle basis overlaps itself and cannot tile
    assert_eq!(run(["gspline", "pou", "--n", "2", "--degree", "3", "--s-h", "0.5"]), 1);
}

#[test]
fn kernel_sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.gst");
    let b = dir.path().join("b.gst");
    for p in [&a, &b] {
        let code = run(["gspline", "--seed", "3", "kernel-sample", "--group", "so2", "--n-h", "4", "--size", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    let (t, _) = gspline::cli::tensor_io::read_tensor(&a).unwrap();
    assert_eq!(t.dims, vec![4, 1, 1, 4, 3, 3]);
}

#[test]
fn exact_equivariance_subcommand_passes() {
    assert_eq!(run(["gspline", "equivariance", "--group", "so2", "--shift", "1,-1"]), 0);
}
