use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn manifest(dir: &Path, name: &str, value: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str], manifest: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kzmono"))
        .args(args)
        .arg("--manifest")
        .arg(manifest)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn spins(level: i64) -> Value {
    json!({
        "algebra": {"series": "A", "rank": 1},
        "level": level,
        "weights": [[1], [1], [1], [1]],
        "points": [[0, 0], [1, 0.25], [2.5, -0.5], [4, 0.5]],
        "braid": {"word": "1 2 1", "compare": "2 1 2"},
        "codim": {"dim_g": 3, "dim_p": 2, "dim_zp": 1, "n": 6}
    })
}

#[test]
fn blocks_report_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["blocks"], &manifest(dir.path(), "m.json", &spins(1)));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("invariants=2 blocks=1"));

    let mut bad = spins(1);
    bad["weights"][2] = json!([2]);
    let o = run(&["blocks"], &manifest(dir.path(), "bad.json", &bad));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[2]"));

    let mut coincident = spins(1);
    coincident["points"][3] = json!([0, 0]);
    let o = run(&["blocks"], &manifest(dir.path(), "c.json", &coincident));
    assert_eq!(o.status.code(), Some(2));

    let out = dir.path().join("out");
    let o = run(
        &["blocks", "--out", out.to_str().unwrap()],
        &manifest(dir.path(), "m.json", &spins(2)),
    );
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("blocks.json")).unwrap()).unwrap();
    assert_eq!(doc["dim"], 2);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], &manifest(dir.path(), "m.json", &spins(2)));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let mut faulty = spins(2);
    faulty["fault"] = json!({"negate_omega": [1, 2]});
    let o = run(&["verify"], &manifest(dir.path(), "f.json", &faulty));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL kohno relations"));

    let a2 = json!({
        "algebra": {"series": "A", "rank": 2},
        "level": 2,
        "weights": [[1, 0], [0, 1], [1, 0], [0, 1]],
        "bbw_max_m": 2
    });
    let o = run(&["verify"], &manifest(dir.path(), "a2.json", &a2));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn braid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["braid", "--out", out.to_str().unwrap()],
        &manifest(dir.path(), "m.json", &spins(2)),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("monodromy.json")).unwrap()).unwrap();
    assert!(doc["comparison"]["residual"].as_f64().unwrap() < 1e-8);
    assert!(doc["monodromy"]["block_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(doc["manifest"]["level"], 2);

    let mut empty = spins(2);
    empty["braid"] = json!({"word": ""});
    let o = run(&["braid"], &manifest(dir.path(), "e.json", &empty));
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        doc["monodromy"]["matrix"],
        json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]])
    );

    let mut far = spins(2);
    far["braid"] = json!({"word": "5"});
    let o = run(&["braid"], &manifest(dir.path(), "far.json", &far));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tables_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "m.json", &spins(1));
    let o = run(&["fusion-table"], &m);
    assert_eq!(stdout(&o), "lambda,mu,nu,N\n0,0,0,1\n0,1,1,1\n1,0,1,1\n1,1,0,1\n");

    let o = run(&["codim-bound"], &m);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["bound"], 1);
    assert_eq!(doc["parity"]["descends"], true);

    let out = dir.path().join("reps");
    let o = run(&["export-rep", "--out", out.to_str().unwrap(), "--threads", "2"], &m);
    assert_eq!(o.status.code(), Some(0));
    for f in ["algebra.json", "rep_1.json", "omega_1_2.json", "omega_3_4.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn deterministic_exact_output() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "m.json", &spins(2));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["blocks", "--out", a.to_str().unwrap()], &m);
    run(&["blocks", "--out", b.to_str().unwrap(), "--threads", "1"], &m);
    assert_eq!(
        std::fs::read(a.join("blocks.json")).unwrap(),
        std::fs::read(b.join("blocks.json")).unwrap()
    );
}

#[test]
fn missing_manifest() {
    let o = Command::new(env!("CARGO_BIN_EXE_kzmono"))
        .arg("verify")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["verify"], Path::new("/nonexistent/manifest.json"));
    assert_eq!(o.status.code(), Some(2));
}
