use std::process::{Command, Output};

use catqkd::channel::{transmission_from_distance, ChannelPoint};
use catqkd::cli::{CRITICAL_HEADER, KEYRATE_HEADER};
use catqkd::keyrate::{biphoton_key, key_rate_closed_form};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catqkd")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn keyrate_sweep_is_deterministic_and_well_formed() {
    let args = ["keyrate-sweep", "--end-km", "50", "--step-km", "10", "--gamma", "0.5"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(KEYRATE_HEADER));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let t = transmission_from_distance(r[0], 0.2).unwrap();
        assert!((r[1] - t).abs() < 1e-11);
        assert_eq!(r[2], 0.5);
        let c = key_rate_closed_form(&ChannelPoint::new(0.5, t).unwrap());
        assert!((r[8] - c.key_fraction).abs() < 1e-11 * c.key_fraction.max(1e-3));
    }
}

#[test]
fn keyrate_sweep_writes_file() {
    let path = std::env::temp_dir().join(format!("catqkd-sweep-{}.csv", std::process::id()));
    let out = run(&["keyrate-sweep", "--end-km", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(body.starts_with(KEYRATE_HEADER));
    assert_eq!(body.lines().count(), 6);
}

#[test]
fn critical_qber_rows_are_roots() {
    let out = run(&["critical-qber", "--start-km", "0", "--end-km", "100", "--step-km", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CRITICAL_HEADER));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let bip = biphoton_key(f[2], f[1]).unwrap().key_fraction;
        assert!((bip - f[3]).abs() < 1e-8, "{line}");
        assert!((f[4] - f[3]).abs() < 1e-8, "{line}");
    }
}

#[test]
fn invalid_sweep_arguments_exit_with_two() {
    assert_eq!(run(&["keyrate-sweep", "--step-km", "0"]).status.code(), Some(2));
    assert_eq!(run(&["keyrate-sweep", "--gamma", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["keyrate-sweep", "--start-km", "-5"]).status.code(), Some(2));
}

#[test]
fn bell_command_reports_violation() {
    let out = run(&["bell", "--gamma", "0.5", "--transmission", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let s_max = text
        .lines()
        .find_map(|l| l.strip_prefix("s_max="))
        .expect("s_max line")
        .parse::<f64>()
        .unwrap();
    let expected = 2.0 * (1.0 + 0.5f64.powf(2.0)).sqrt();
    assert!((s_max - expected).abs() < 1e-10);
}

#[test]
fn gate_decomposition_exit_codes() {
    assert_eq!(run(&["gate-decomp", "--c-re", "1", "--d-re", "0"]).status.code(), Some(0));
    assert_eq!(run(&["gate-decomp", "--c-re", "0", "--d-re", "0"]).status.code(), Some(2));
    assert_eq!(run(&["gate-decomp", "--c-re", "1", "--d-re", "1"]).status.code(), Some(2));
    let out = run(&["gate-decomp", "--c-re", "0.6", "--d-im", "-0.8"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn oracle_check_exit_codes() {
    let bad = run(&["oracle-check", "--alpha", "5", "--phi", "0.7853981633974483", "--transmission", "0.5", "--n-max", "16"]);
    assert_eq!(bad.status.code(), Some(2));
    let good = run(&["oracle-check", "--alpha", "1", "--phi", "0.5235987755982988", "--transmission", "0.8"]);
    assert_eq!(good.status.code(), Some(0));
}
