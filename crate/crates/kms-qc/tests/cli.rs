use std::process::Command;

use clap::Parser;
use kms_qc::cli::{run, Cli};
use kms_qc::coleman::ColemanEngine;
use kms_qc::curve::{HyperellipticCurve, RationalPoint};
use kms_qc::PadicContext;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["kms-qc"];
    full.extend_from_slice(args);
    let out = run(&Cli::try_parse_from(full).unwrap());
    (out.code, out.stdout, out.stderr)
}

fn binary(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_kms-qc")).args(args).output().unwrap();
    (out.status.code().unwrap(), out.stdout)
}

#[test]
fn integrate_between_conjugate_points() {
    let (code, out, _) = cli(&["--format", "json", "integrate", "--a", "31", "--p", "3", "--prec", "8", "--from", "(0,1)", "--to", "(0,-1)", "--word", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], "2*3^2 + 3^3 + 3^4 + 3^5 + 2*3^6 + O(3^8)");
    assert_eq!(v["certified_precision"], 8);

    // the same integral through a different Frobenius anchor
    let curve = HyperellipticCurve::kms_int(31).unwrap();
    let ctx = PadicContext::new(3, 40).unwrap();
    let b = RationalPoint::affine(0, 1).to_padic(&ctx);
    let anchor = curve.reduce_mod_p(&RationalPoint::affine(1, 8).to_padic(&ctx)).unwrap();
    let engine = ColemanEngine::new(&curve, &ctx, 12, &anchor).unwrap();
    let other = &engine.single_integrals(&b, &b.involution()).unwrap()[1].value;
    assert_eq!(other.truncate(8).to_series_string(), v["value"]);
}

#[test]
fn hodge_text_for_a_31() {
    let (code, out, _) = cli(&["hodge", "--a", "31"]);
    assert_eq!(code, 0);
    assert!(out.contains("c^H = 0"));
    assert!(out.contains("r^H = (0, 1/2*x,"));
    assert!(out.contains("xi  = 0"));
}

#[test]
fn frobenius_json_reports_the_count_check() {
    let (code, out, _) = cli(&["--format", "json", "frobenius", "--a", "19", "--p", "11", "--prec", "6"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["trace_matches_count"], true);
    assert_eq!(v["det_is_p_squared"], true);
    assert_eq!(v["point_count"], 20);
    assert_eq!(v["h1_block"].as_array().unwrap().len(), 4);
}

#[test]
fn general_sextic_through_f_flag() {
    // y^2 = x^6 + x + 3
    let (code, out, _) = cli(&["--format", "json", "frobenius", "--f", "3,1,0,0,0,0,1", "--p", "7", "--prec", "6"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["trace_matches_count"], true);
}

#[test]
fn errors_are_machine_readable() {
    let (code, out, _) = cli(&["--format", "json", "qc-solve", "--a", "31", "--p", "7"]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["kind"], "bad_reduction");

    let (code, out, _) = cli(&["--format", "json", "qc-solve", "--a", "31", "--p", "3", "--z0", "(0,1)"]);
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["kind"], "degenerate");

    let (code, _, err) = cli(&["hodge", "--a", "31", "--basepoint", "(1,1)"]);
    assert_eq!(code, 2);
    assert!(err.contains("invalid_input"));

    let (code, _, _) = cli(&["frobenius", "--a", "31", "--p", "3", "--prec", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = |t: &'static str| ["--threads", t, "--format", "json", "qc-solve", "--a", "31", "--p", "3", "--prec", "5"];
    let (c1, one) = binary(&args("1"));
    let (c2, two) = binary(&args("3"));
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(one, two);
    let v: Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(v["disks"].as_array().unwrap().len(), 8);
    let (code, _) = binary(&["--threads", "0", "hodge", "--a", "31"]);
    assert_eq!(code, 2);
}

#[test]
fn selftest_passes() {
    let (code, out) = binary(&["selftest", "--quick"]);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&out));
}

#[test]
fn padic_points_on_the_command_line() {
    let (code, out, _) = cli(&[
        "integrate", "--field", "padic", "--a", "31", "--p", "3", "--prec", "6", "--from", "(0,1)", "--to", "(1 + 2*3 + O(3^12), 440 + O(3^12))", "--word", "0",
    ]);
    assert_eq!(code, 0);
    let (_, exact, _) = cli(&["integrate", "--a", "31", "--p", "3", "--prec", "6", "--from", "(0,1)", "--to", "(7,440)", "--word", "0"]);
    assert_eq!(out.lines().next().unwrap().rsplit(" = ").next(), exact.lines().next().unwrap().rsplit(" = ").next());
}
