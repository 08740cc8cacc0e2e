use std::fs;
use std::process::Command;

use serde_json::Value;

fn qss(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    (out.status.code().expect("exit code"), report)
}

#[test]
fn eval_matches_reference_on_both_backends() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.txt");
    fs::write(&circuit, "H 0\nT 0\nH 0\n").unwrap();
    let c = circuit.to_str().unwrap();
    let (code, r) = qss(&[
        "eval",
        "--circuit",
        c,
        "--magic",
        "1",
        "--parties",
        "5",
        "--backend",
        "both",
    ]);
    assert_eq!(code, 0);
    for key in [
        "config",
        "result",
        "transcript",
        "audits",
        "distances",
        "version",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let distances = r["distances"].as_array().unwrap();
    assert_eq!(distances.len(), 3);
    for d in distances {
        assert!(d["value"].as_f64().unwrap() <= 1e-9);
        assert_eq!(d["tolerance"].as_f64().unwrap(), 1e-9);
    }
}

#[test]
fn exceeding_the_magic_budget_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.txt");
    fs::write(&circuit, "T 0\nT 0\n").unwrap();
    let (code, r) = qss(&[
        "eval",
        "--circuit",
        circuit.to_str().unwrap(),
        "--magic",
        "1",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "magic_budget");
    assert!(r["error"]["message"]
        .as_str()
        .unwrap()
        .contains("T-count exceeds magic budget"));
}

#[test]
fn circuit_syntax_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.txt");
    fs::write(&circuit, "H 0\nCNOT 0 0\n").unwrap();
    let (code, r) = qss(&[
        "eval",
        "--circuit",
        circuit.to_str().unwrap(),
        "--secret-qubits",
        "2",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["line"], 2);
    assert_eq!(r["error"]["column"], 8);
}

#[test]
fn dense_width_cap_exits_three() {
    let (code, r) = qss(&[
        "deal",
        "--secret-qubits",
        "2",
        "--magic",
        "1",
        "--backend",
        "dense",
    ]);
    assert_eq!(code, 3);
    assert_eq!(r["error"]["kind"], "width_cap");
}

#[test]
fn threshold_audit_on_fresh_deal() {
    let (code, r) = qss(&["audit", "--secret", "magic", "--parties", "3"]);
    assert_eq!(code, 0);
    let checks = r["audits"]["threshold"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c["deviation"].as_f64() == Some(0.0)));
}

#[test]
fn reports_are_deterministic_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.txt");
    fs::write(&circuit, "H 0\nT 0\nS 0\nT 0\n").unwrap();
    let out = dir.path().join("r.json");
    let args = [
        "eval",
        "--circuit",
        circuit.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ];
    let (_, first) = qss(&args);
    let written = fs::read_to_string(&out).unwrap();
    let (_, second) = qss(&args);
    assert_eq!(first, second);
    assert_eq!(serde_json::from_str::<Value>(&written).unwrap(), first);
}

#[test]
fn coefficient_file_secret_and_adversary_file() {
    let dir = tempfile::tempdir().unwrap();
    let secret = dir.path().join("s.txt");
    fs::write(&secret, "# Bloch (0.6, 0, -0.8)\nX 0.6\n-Z 0.8\n").unwrap();
    let circuit = dir.path().join("c.txt");
    fs::write(&circuit, "T 0\n").unwrap();
    let adversary = dir.path().join("a.json");
    fs::write(
        &adversary,
        r#"{"coalition": [0, 1, 2, 3],
            "actions": [{"gate": 0, "deviation": {"abstain": {"column": 2}}}],
            "audits": ["honest_bit"]}"#,
    )
    .unwrap();
    let (code, r) = qss(&[
        "audit",
        "--secret",
        secret.to_str().unwrap(),
        "--circuit",
        circuit.to_str().unwrap(),
        "--adversary",
        adversary.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["result"]["passed"]["honest_bit"], true);

    fs::write(&adversary, r#"{"coalition": [0, 1, 2, 3, 4]}"#).unwrap();
    let (code, r) = qss(&[
        "audit",
        "--circuit",
        circuit.to_str().unwrap(),
        "--adversary",
        adversary.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "adversary");
}
