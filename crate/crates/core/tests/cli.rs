use std::path::Path;
use std::process::{Command, Output};

use switchrisk::experiments::{generate_synthetic, SyntheticKind, SyntheticSpec};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_switchrisk")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_sample(dir: &Path, offset: f64, scale: f64) -> String {
    let spec = SyntheticSpec {
        kind: SyntheticKind::ArbitrarySwitching,
        weights: vec![vec![0.6, 0.1], vec![-0.5, 0.2]],
        classifier: None,
        noise: 0.05,
        n: 120,
        r_x: 1.0,
        seed: 21,
    };
    let data = generate_synthetic(&spec).unwrap().data;
    // raw units differ from the canonical scale, so the round trip exercises rescaling
    let mut text = String::from("x1,x2,y\n");
    for (x, y) in data.xs().iter().zip(data.ys()) {
        text.push_str(&format!("{:?},{:?},{:?}\n", x[0], x[1], offset + scale * y));
    }
    let path = dir.join("sample.csv");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn fit_then_bound_reproduces_the_objective() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_sample(dir.path(), 3.0, 8.0);
    let model = dir.path().join("model.json");
    for kind in ["switching", "pws"] {
        let fit = run(&["fit", "--data", &data, "--C", "2", "--model", kind, "--seed", "1", "--out", model.to_str().unwrap()]);
        assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
        let stored: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
        let objective = stored["objective"].as_f64().unwrap();
        let b = json(&run(&[
            "bound", "switching-linear", "--emp-from-model", model.to_str().unwrap(), "--data", &data, "--p", "2",
            "--C", "2", "--Rx", "1", "--Rw", "1", "--delta", "0.05",
        ]));
        let emp = b["empirical_risk"].as_f64().unwrap();
        assert!((emp - objective).abs() <= 1e-10, "{kind}: {emp} vs {objective}");
        assert_eq!(b["inputs"]["n"].as_u64(), Some(120));
        assert_eq!(b["scale"]["factor"].as_f64(), stored["model"]["scale"]["factor"].as_f64());
    }
}

#[test]
fn bias_feature_and_kernel_fits() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_sample(dir.path(), 0.0, 1.0);
    let r = json(&run(&["fit", "--data", &data, "--C", "2", "--bias", "--seed", "2"]));
    assert_eq!(r["model"]["bias_feature"], true);
    assert_eq!(r["model"]["components"][0]["w"].as_array().unwrap().len(), 3);
    let r = json(&run(&["fit", "--data", &data, "--C", "2", "--model", "kernel", "--kernel", "gaussian:0.5", "--seed", "2"]));
    assert!(r["objective"].as_f64().unwrap() < 0.05);
}

#[test]
fn reference_values() {
    let b = json(&run(&[
        "bound", "switching-linear", "--emp", "0.1", "--p", "1", "--C", "2", "--Rx", "1", "--Rw", "1", "--n", "400",
        "--delta", "0.1353",
    ]));
    assert!((b["raw_total"].as_f64().unwrap() - 0.35).abs() < 1e-4);
    assert_eq!(b["formula_id"], "switching-linear");
    let c = json(&run(&["capacity", "rad-linear", "--Rx", "1", "--Rw", "1", "--n", "100"]));
    assert_eq!(c["value"].as_f64(), Some(0.1));
}

#[test]
fn missing_seed_is_a_usage_error() {
    for args in [
        &["validate", "--config", "x.json"][..],
        &["fit", "--data", "x.csv", "--C", "2"][..],
        &["srm", "--data", "x.csv", "--C-max", "2", "--formula", "trivial", "--delta", "0.1"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    }
    let dir = tempfile::tempdir().unwrap();
    let data = write_sample(dir.path(), 0.0, 1.0);
    assert_eq!(run(&["capacity", "rad-mc", "--data", &data, "--Rw", "1"]).status.code(), Some(2));
    let mc = json(&run(&["capacity", "rad-mc", "--data", &data, "--Rw", "1", "--seed", "1", "--draws", "2000"]));
    assert!(mc["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x1,y\n0.1,0.2\n0.3,oops\n").unwrap();
    let out = run(&["fit", "--data", path.to_str().unwrap(), "--C", "1", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn tsv_outputs_have_a_header_and_parse() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_sample(dir.path(), 0.0, 1.0);
    let outputs = [
        run(&["rate", "pws-kernel", "--p", "2", "--d", "2", "--Rx", "1", "--RH", "1", "--C", "2", "--tsv"]),
        run(&[
            "srm", "--data", &data, "--C-max", "3", "--formula", "switching-linear", "--p", "2", "--Rx", "1", "--Rw",
            "1", "--delta", "0.05", "--seed", "1", "--tsv",
        ]),
        run(&["capacity", "rad-pwa", "--C", "2", "--d", "2", "--Rx", "1", "--Rw", "1", "--grid", "2^6..2^10"]),
        run(&["fit", "--data", &data, "--C", "2", "--seed", "1", "--tsv"]),
    ];
    for out in &outputs {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let mut lines = text.lines();
        let width = lines.next().unwrap().split('\t').count();
        let mut rows = 0;
        for line in lines {
            let cells: Vec<&str> = line.split('\t').collect();
            assert_eq!(cells.len(), width);
            for c in cells {
                c.parse::<f64>().unwrap();
            }
            rows += 1;
        }
        assert!(rows >= 1);
    }
}

#[test]
fn synthetic_srm_picks_two_modes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        kind: SyntheticKind::ArbitrarySwitching,
        weights: vec![vec![0.7, 0.0], vec![-0.7, 0.0]],
        classifier: None,
        noise: 0.1,
        n: 2000,
        r_x: 1.0,
        seed: 0,
    };
    let path = dir.path().join("spec.json");
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let r = json(&run(&[
        "srm", "--synthetic", path.to_str().unwrap(), "--C-max", "3", "--formula", "switching-linear", "--p", "2",
        "--Rx", "1", "--Rw", "0.75", "--delta", "0.05", "--seed", "11",
    ]));
    assert_eq!(r["best_modes"], 2);
    assert_eq!(r["table"].as_array().unwrap().len(), 3);
}
