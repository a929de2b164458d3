//! End-to-end checks of the `torsion` binary: output shapes, determinism
//! hooks, and the exit-code contract (0 success, 1 invalid input).

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use torsion::search::is_prime;
use torsion::zaremba::{gamma_product, parse_lr_word, representable_set};

fn torsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torsion")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a single JSON document")
}

fn assert_exit_code(out: &Output, code: i32) {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stderr.is_empty(), "failures must explain themselves on stderr");
}

const RANK2_DATA: &str = r#"{"n":2,"items":[{"w":[2,1],"a":1,"b":0}]}"#;

#[test]
fn eval_word_reports_the_operator_value() {
    let v = stdout_json(&torsion(&["eval-word", "--data", RANK2_DATA]));
    assert_eq!(v["n"], 2);
    assert_eq!(v["N"], 3);
    assert_eq!(v["value"], "1");
}

#[test]
fn build_reports_the_reduced_word() {
    let v = stdout_json(&torsion(&["build", "--data", RANK2_DATA]));
    assert_eq!(v["N"], 3);
    assert_eq!(v["length"], 3);
    assert_eq!(v["word"], serde_json::json!([2, 1, 2]));
    assert_eq!(v["x"], serde_json::json!([1, 3, 2]));
}

#[test]
fn build_reads_data_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_torsion"))
        .args(["build", "--file", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child.stdin.take().expect("stdin").write_all(RANK2_DATA.as_bytes()).expect("write");
    let out = child.wait_with_output().expect("binary finishes");
    let inline = torsion(&["build", "--data", RANK2_DATA]);
    assert!(out.status.success());
    assert_eq!(out.stdout, inline.stdout);
}

#[test]
fn certify_emits_a_complete_certificate() {
    let v = stdout_json(&torsion(&["certify", "--data", RANK2_DATA]));
    assert_eq!(v["N"], 3);
    assert_eq!(v["value"], "-1");
    assert_eq!(v["primes"], serde_json::json!([]));
    assert_eq!(v["word"], serde_json::json!([2, 1, 2]));
}

#[test]
fn fib_lists_fibonacci_values_with_primes() {
    let out = torsion(&["fib", "--max-i", "5"]);
    assert!(out.status.success());
    let lines: Vec<Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect();
    assert_eq!(lines.len(), 5);
    let values: Vec<&str> = lines.iter().map(|l| l["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["1", "2", "3", "5", "8"]);
    assert_eq!(lines[3]["primes"], serde_json::json!(["5"]));
    assert_eq!(lines[4]["primes"], serde_json::json!(["2", "2", "2"]));
    assert_eq!(lines[4]["N"], 20);
}

#[test]
fn ulu_certifies_all_four_entries() {
    let v = stdout_json(&torsion(&["ulu", "--word", "LULU"]));
    assert_eq!(v["N"], 17);
    let entries = v["entries"].as_array().expect("entries");
    assert_eq!(entries.len(), 4);
    // the matrix product of the lower and upper generators, twice
    assert_eq!(v["matrix"], serde_json::json!([["5", "3"], ["3", "2"]]));
    for entry in entries {
        let value: BigInt = entry["value"].as_str().unwrap().parse().unwrap();
        let matrix_entry: BigInt = entry["matrix_entry"].as_str().unwrap().parse().unwrap();
        assert_eq!(value.abs(), matrix_entry, "operator value must match the entry up to sign");
    }
}

#[test]
fn search_emits_reverifiable_records() {
    let out = torsion(&[
        "search", "--n", "5", "--ops", "paper8", "--seeds", "x1^3,x1^2*x5", "--max-len", "12",
        "--iters", "20000", "--rng-seed", "1", "--bias", "2", "--workers", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut records = 0;
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).expect("record line is JSON");
        let p: BigInt = v["p"].as_str().unwrap().parse().unwrap();
        let value: BigInt = v["value"].as_str().unwrap().parse().unwrap();
        assert!(is_prime(&p));
        assert!((value.abs() % &p).is_zero(), "p must divide the value");
        // rank 9 is the cheapest possible hit: n = 5, a cubic seed, one op
        assert!(v["N"].as_u64().unwrap() >= 9);
        records += 1;
    }
    assert!(records > 0, "a 20k-step run should land at least one record");
}

#[test]
fn zaremba_density_counts_match_the_library() {
    let v = stdout_json(&torsion(&["zaremba", "density", "--A", "3", "--N", "1000"]));
    let expected = representable_set(3, 1000, 1).expect("enumeration").len() as u64;
    assert_eq!(v["count"].as_u64(), Some(expected));
    // the density field is the reduced fraction count/N
    let (numer, denom) = v["density"].as_str().unwrap().split_once('/').expect("fraction");
    let numer: u64 = numer.parse().unwrap();
    let denom: u64 = denom.parse().unwrap();
    assert_eq!(numer * 1000, denom * expected);
}

#[test]
fn zaremba_primes_lie_in_the_window() {
    let v = stdout_json(&torsion(&[
        "zaremba", "primes", "--A", "5", "--theta", "0.5", "--N", "2000",
    ]));
    let records = v["primes"].as_array().expect("prime list");
    assert!(!records.is_empty());
    for p in records {
        let p = p.as_u64().expect("prime fits u64");
        assert!(p > 1000 && p <= 2000, "prime {p} outside the window");
        assert!(is_prime(&BigInt::from(p)));
    }
}

#[test]
fn zaremba_growth_produces_a_witness() {
    let v = stdout_json(&torsion(&["zaremba", "growth", "--L", "12"]));
    assert_eq!(v["L"], 12);
    let p = v["p"].as_u64().expect("witness prime");
    assert!(is_prime(&BigInt::from(p)));
    assert!(v["ell"].as_u64().unwrap() <= 12);
}

#[test]
fn zaremba_bridge_matches_the_matrix_product() {
    let v = stdout_json(&torsion(&["zaremba", "bridge", "--word", "LRL"]));
    let product = gamma_product(&parse_lr_word("LRL").unwrap());
    for (i, row) in v["gamma"].as_array().unwrap().iter().enumerate() {
        for (j, entry) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(entry.as_str().unwrap(), product.e[i][j].to_string());
        }
    }
    assert!(v["entries"].as_array().map(Vec::len).unwrap() >= 3);
}

#[test]
fn selftest_reports_every_module() {
    let out = torsion(&["selftest"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["sym", "poly", "nilhecke", "schubert", "construct", "search", "zaremba"] {
        assert!(text.contains(&format!("selftest {name}: ok")), "missing suite {name}");
    }
}

// ---------------------------------------------------------------------------
// failure paths: exit code 1 with a message on stderr

#[test]
fn rejects_malformed_data_json() {
    assert_exit_code(&torsion(&["eval-word", "--data", "{not json"]), 1);
}

#[test]
fn rejects_rank_one_data() {
    assert_exit_code(&torsion(&["eval-word", "--data", r#"{"n":1,"items":[]}"#]), 1);
}

#[test]
fn rejects_unknown_operator_set() {
    assert_exit_code(
        &torsion(&["search", "--n", "5", "--ops", "mystery", "--seeds", "x1^3"]),
        1,
    );
}

#[test]
fn rejects_malformed_seed_monomials() {
    assert_exit_code(
        &torsion(&["search", "--n", "5", "--ops", "paper8", "--seeds", "y1^3"]),
        1,
    );
}

#[test]
fn certify_refuses_vanishing_words() {
    // a lone middle reflection kills the seed monomial
    let data = r#"{"n":3,"items":[{"w":[1,3,2],"a":1,"b":0}]}"#;
    assert_exit_code(&torsion(&["certify", "--data", data]), 1);
}

#[test]
fn growth_without_a_witness_fails_cleanly() {
    assert_exit_code(&torsion(&["zaremba", "growth", "--L", "10"]), 1);
}

#[test]
fn rejects_theta_outside_the_unit_interval() {
    assert_exit_code(
        &torsion(&["zaremba", "primes", "--A", "5", "--theta", "1.5", "--N", "100"]),
        1,
    );
}

#[test]
fn rejects_unknown_subcommands() {
    assert_exit_code(&torsion(&["frobnicate"]), 1);
}
