use std::process::{Command, Output};

use iqht_cli::commands::parse_operator;
use iqht_core::ope::{ope, parse_expansion, Expansion, Point};
use proptest::prelude::*;
use serde_json::Value;

fn iqht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iqht")).args(args).env_remove("IQHT_OUT_DIR").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(iqht(&["beta", "--n", "4"]).status.code(), Some(0));
    assert_eq!(iqht(&["verify-all", "--only", "5"]).status.code(), Some(1));
    assert_eq!(iqht(&["verify-all", "--only", "1,10"]).status.code(), Some(0));
    for bad in [
        &["kt", "--n", "4", "--ratio", "0.5"][..],
        &["ope", "OI", "Q"],
        &["ope", "OI", "OI", "--format", "csv"],
        &["flow", "--delta-re", "0.1", "--delta-im", "0.1"],
        &["flow", "--delta-re", "1", "--t-end", "100"],
        &["conductance", "--tau", "-1"],
        &["conductance", "--tau", "nan"],
        &["laplacian-check", "--sizes", "30"],
        &["beta", "--n", "0"],
        &["no-such-command"],
    ] {
        let out = iqht(bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(out.stdout.is_empty() && !out.stderr.is_empty(), "{bad:?}");
    }
}

#[test]
fn beta_at_level_four() {
    let out = iqht(&["beta", "--n", "4", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dgamma/dln a = -1/16*delta^2 + 1/16*gamma*delta^2"), "{text}");
    assert!(text.contains("ddelta/dln a = 1/48*delta^3"), "{text}");
}

#[test]
fn documented_examples() {
    let m = json(&iqht(&["mfspectrum", "--n", "4", "--q", "0"]));
    assert_eq!(m["delta_q"].as_f64(), Some(0.0));
    let c = json(&iqht(&["conductance", "--tau", "1.5707963", "--n", "4"]));
    assert!((c["g_star"].as_f64().unwrap() - 0.6342384).abs() < 5e-6);
    assert!(c["duality_residual"].as_f64().unwrap() < 1e-12);
    for v in [&m, &c] {
        assert!(v["anchor"].as_str().is_some_and(|a| !a.is_empty()));
    }
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 5] = [
        (&["flow", "--delta-re", "0.1", "--t-end", "1"], "t,gamma,re_delta,im_delta"),
        (&["flow", "--portrait", "--t-end", "1", "--dt", "0.5"], "trajectory,gamma0,re_delta0,im_delta0,t,gamma,re_delta,im_delta"),
        (&["conductance", "--tau-min", "0.1", "--tau-max", "2", "--points", "5"], "tau,g_half,g_dual,abs_diff"),
        (&["mfspectrum", "--format", "csv"], "q,delta_q"),
        (&["laplacian-check", "--sizes", "16,32", "--format", "csv"], "size,green_error,tree_error"),
    ];
    for (args, header) in cases {
        let out = iqht(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().next(), Some(header));
        let width = header.split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == width));
    }
}

#[test]
fn verify_all_is_deterministic() {
    let args = ["verify-all", "--only", "1,2,3,4,5,6,7,8,10"];
    let (a, b) = (iqht(&args), iqht(&args));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["criteria"].as_array().unwrap().len(), 9);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_iqht"))
        .args(["kt", "--n", "6", "--ratio", "10"])
        .env("IQHT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("kt.json")).unwrap()).unwrap();
    assert_eq!(v["sign"], "positive");

    let explicit = dir.path().join("sub").join("m.csv");
    let out = iqht(&["mfspectrum", "--format", "csv", "-o", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(explicit).unwrap().starts_with("q,delta_q\n"));
}

#[test]
fn ope_json_and_text_agree() {
    let v = json(&iqht(&["ope", "OI", "OA", "--format", "json"]));
    let from_json: Expansion = serde_json::from_value(v["expansion"].clone()).unwrap();
    let from_text = parse_expansion(v["text"].as_str().unwrap()).unwrap();
    assert!(from_json.equivalent(&from_text));
    let text = String::from_utf8(iqht(&["ope", "OI", "OA"]).stdout).unwrap();
    assert_eq!(text, v["text"].as_str().unwrap());
}

const VOCAB: [&str; 11] = ["J", "Jb", "J(A)", "Jb(A)", "M(B)", "Mi(B)", "OA", "OI", "O", "T", "Tb"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansions_round_trip_through_json_and_text(i in 0usize..11, k in 0usize..11) {
        let a = parse_operator(VOCAB[i]).unwrap().at(Point('z'));
        let b = parse_operator(VOCAB[k]).unwrap().at(Point::ORIGIN);
        if let Ok(e) = ope(&a, &b) {
            let e = e.canonical();
            let back: Expansion = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
            prop_assert!(back.equivalent(&e));
            let text = e.to_string();
            prop_assert_eq!(parse_expansion(&text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn floats_keep_fifteen_digits(x in -1e6f64..1e6) {
        let v = iqht_cli::format::num(x).as_f64().unwrap();
        prop_assert!((v - x).abs() <= 1e-14 * x.abs().max(f64::MIN_POSITIVE));
        prop_assert_eq!(iqht_cli::format::num(v).as_f64(), Some(v));
    }
}
