use std::path::Path;
use std::process::{Command, Output};

use qcmeasure::states::{bell_phi_plus, maximally_mixed, random_state, write_state};

fn qcmeasure(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcmeasure")).args(args).output().expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compute_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bell.json");
    let out = dir.path().join("report.json");
    write_state(&input, &bell_phi_plus()).unwrap();
    let status = qcmeasure(&["compute", "--input", arg(&input), "--out", arg(&out)]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let r = report(&out);
    for key in ["q", "d_g", "negativity_sq"] {
        assert!((r[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
    }
    assert_eq!(r["scheme"], "closed");
    assert_eq!(r["k"].as_array().unwrap().len(), 3);
    assert!(r.get("shots").is_none());
}

#[test]
fn compute_maximally_mixed_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mixed.json");
    let out = dir.path().join("report.json");
    write_state(&input, &maximally_mixed(3).unwrap()).unwrap();
    assert!(qcmeasure(&["compute", "--input", arg(&input), "--out", arg(&out)]).status.success());
    let r = report(&out);
    for key in ["q", "d_g", "d_g_upper", "negativity_sq", "trace_s", "trace_s2"] {
        assert!(r[key].as_f64().unwrap().abs() < 1e-15, "{key}");
    }
}

#[test]
fn schemes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("state.json");
    write_state(&input, &random_state(3, 4, 11).unwrap()).unwrap();
    let mut qs = Vec::new();
    for scheme in ["closed", "traces", "projectors"] {
        let out = dir.path().join(format!("{scheme}.json"));
        assert!(qcmeasure(&["compute", "--input", arg(&input), "--scheme", scheme, "--out", arg(&out)])
            .status
            .success());
        qs.push(report(&out)["q"].as_f64().unwrap());
    }
    assert!((qs[1] - qs[0]).abs() < 1e-9 && (qs[2] - qs[0]).abs() < 1e-9, "{qs:?}");

    let out = dir.path().join("sampled.json");
    let run = qcmeasure(&[
        "compute",
        "--input",
        arg(&input),
        "--scheme",
        "sampled",
        "--shots",
        "20000",
        "--seed",
        "3",
        "--out",
        arg(&out),
    ]);
    assert!(run.status.success());
    let r = report(&out);
    assert_eq!(r["shots"], 20000);
    assert!(r["stderr_q"].as_f64().unwrap() > 0.0);
}

#[test]
fn compute_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim_a":2,"dim_b":2,"re":[[1,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,0]],"im":[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#).unwrap();
    let run = qcmeasure(&["compute", "--input", arg(&bad), "--out", arg(&out)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("trace"));

    let good = dir.path().join("good.json");
    write_state(&good, &bell_phi_plus()).unwrap();
    let run = qcmeasure(&["compute", "--input", arg(&good), "--shots", "100", "--out", arg(&out)]);
    assert_eq!(run.status.code(), Some(2));
    let run = qcmeasure(&["compute", "--input", arg(&good), "--scheme", "sampled", "--out", arg(&out)]);
    assert_eq!(run.status.code(), Some(2));

    let unwritable = dir.path().join("missing").join("report.json");
    let run = qcmeasure(&["compute", "--input", arg(&good), "--out", arg(&unwritable)]);
    assert_eq!(run.status.code(), Some(3));
    let run = qcmeasure(&["compute", "--input", arg(&dir.path().join("nope.json")), "--out", arg(&out)]);
    assert_eq!(run.status.code(), Some(3));
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn scatter_is_deterministic_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert!(qcmeasure(&["scatter", "--count", "500", "--seed", "42", "--out", arg(out)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let table = rows(&a);
    assert_eq!(table[0], ["index", "rank", "q", "d_g", "negativity_sq"]);
    assert_eq!(table.len(), 501);
    for row in &table[1..] {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[3] + 1e-9 && v[4] <= v[2] + 1e-9);
        // at least 12 significant digits
        assert!(row[2].split('e').next().unwrap().len() >= 13);
    }
}

#[test]
fn scatter_rows_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert!(qcmeasure(&["scatter", "--count", "5", "--seed", "10", "--rank", "2", "--dim-b", "3", "--out", arg(&out)])
        .status
        .success());
    let table = rows(&out);
    for (i, row) in table[1..].iter().enumerate() {
        let rho = random_state(3, 2, 10 + i as u64).unwrap();
        let q: f64 = row[2].parse().unwrap();
        assert_eq!(row[1], "2");
        assert!((q - qcmeasure::correlations::q_measure(&rho)).abs() < 1e-14);
    }
}

#[test]
fn scatter_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no").join("s.csv");
    assert_eq!(qcmeasure(&["scatter", "--count", "3", "--out", arg(&out)]).status.code(), Some(3));
}

#[test]
fn dqc1_scan_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    assert!(qcmeasure(&["dqc1", "--mu-steps", "11", "--out", arg(&out)]).status.success());
    let table = rows(&out);
    assert_eq!(table[0], ["mu", "q", "d_g", "negativity_sq"]);
    let v: Vec<Vec<f64>> = table[1..].iter().map(|r| r.iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(v.len(), 11);
    assert_eq!(v[0][1], 0.0);
    assert_eq!(v[0][2], 0.0);
    assert_eq!(v[10][0], 1.0);
    for w in v.windows(2) {
        assert!(w[1][1] - w[0][1] >= -1e-10);
    }
    assert!(v.iter().all(|r| r[3].abs() < 1e-10));

    let other = dir.path().join("n2.csv");
    assert!(qcmeasure(&["dqc1", "--mu-steps", "3", "--register-qubits", "2", "--out", arg(&other)]).status.success());
    assert_eq!(qcmeasure(&["dqc1", "--mu-steps", "1", "--out", arg(&other)]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let ok = qcmeasure(&["verify", "--trials", "40", "--seed", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(text.matches("PASS").count(), 5);

    let faulty = qcmeasure(&["verify", "--trials", "40", "--inject-fault", "polynomial-sign"]);
    assert_eq!(faulty.status.code(), Some(1));
    let text = String::from_utf8_lossy(&faulty.stdout);
    assert!(text.lines().any(|l| l.starts_with("route equivalence") && l.contains("FAIL")));

    assert_eq!(qcmeasure(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(qcmeasure(&["verify", "--bogus"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("count = 4\nseed = 3\nout = {:?}\n", arg(&out))).unwrap();
    assert!(qcmeasure(&["--config", arg(&cfg), "scatter"]).status.success());
    assert_eq!(rows(&out).len(), 5);
    assert!(qcmeasure(&["--config", arg(&cfg), "scatter", "--count", "2"]).status.success());
    assert_eq!(rows(&out).len(), 3);
    assert_eq!(qcmeasure(&["--config", arg(&dir.path().join("absent.toml")), "verify"]).status.code(), Some(3));
}
