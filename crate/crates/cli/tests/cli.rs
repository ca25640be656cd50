use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn mdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/pano")
}

/// `(id, A, b)`.
type Entry<'a> = (&'a str, [[f64; 2]; 2], [f64; 2]);

fn write_set(dir: &TempDir, name: &str, entries: &[Entry]) -> PathBuf {
    let entries: Vec<Value> = entries
        .iter()
        .map(|(id, a, b)| json!({"id": id, "A": a, "b": b, "width": 100, "height": 80}))
        .collect();
    let path = dir.path().join(name);
    std::fs::write(
        &path,
        json!({"version": 1, "dim": 2, "entries": entries}).to_string(),
    )
    .unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v.clone()).unwrap()
}

fn assert_close(a: &[Vec<f64>], b: &[[f64; 2]; 2], tol: f64) {
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }
}

fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

#[test]
fn orthogonal_set_has_identity_mdt() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", rotation(0.3), [0.0; 2]),
            ("b", rotation(-1.2), [0.0; 2]),
        ],
    );
    let out = dir.path().join("out.json");
    let run = mdt(&["mdt", "--input", s(&input), "--output", s(&out), "-q"]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(run.stdout.is_empty());
    let doc = read_json(&out);
    assert_close(&matrix(&doc["transform"]), &[[1.0, 0.0], [0.0, 1.0]], 1e-12);
    assert!(doc["objective"].as_f64().unwrap() < 1e-20);
}

#[test]
fn diagonal_set_gives_geometric_mean() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", [[4.0, 0.0], [0.0, 1.0]], [0.0; 2]),
            ("b", [[1.0, 0.0], [0.0, 1.0]], [0.0; 2]),
        ],
    );
    let run = mdt(&["mdt", "--input", s(&input)]);
    assert!(run.status.success());
    let doc: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_close(&matrix(&doc["transform"]), &[[2.0, 0.0], [0.0, 1.0]], 1e-12);
    assert_eq!(doc["baseline_objectives"][0]["id"], "a");
}

#[test]
fn malformed_json_exits_1_with_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"version\": 1,\n  \"dim\": 2\n  \"entries\": []\n}",
    )
    .unwrap();
    for sub in ["mdt", "report", "rereference"] {
        let run = mdt(&[sub, "--input", s(&path)]);
        assert_eq!(run.status.code(), Some(1));
        let err = String::from_utf8_lossy(&run.stderr);
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("column"), "{err}");
    }
}

#[test]
fn missing_file_exits_1() {
    let run = mdt(&["mdt", "--input", "/nonexistent/transforms.json"]);
    assert_eq!(run.status.code(), Some(1));
}

#[test]
fn singular_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[("a", [[1.0, 2.0], [2.0, 4.0]], [0.0; 2])],
    );
    assert_eq!(mdt(&["mdt", "--input", s(&input)]).status.code(), Some(2));
}

#[test]
fn iteration_cap_exits_3_with_diagnostics() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", [[5.0, 2.0], [0.0, 1.0]], [0.0; 2]),
            ("b", [[1.0, 0.0], [-0.5, 3.0]], [0.0; 2]),
            ("c", [[0.2, 0.0], [0.3, 7.0]], [0.0; 2]),
        ],
    );
    let run = mdt(&["mdt", "--input", s(&input), "--max-iters", "1"]);
    assert_eq!(run.status.code(), Some(3));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("1 iteration"), "{err}");
}

fn report(input: &Path, reference: &str) -> Value {
    let run = mdt(&["report", "--input", s(input), "--reference", reference]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    serde_json::from_slice(&run.stdout).unwrap()
}

#[test]
fn identity_reference_on_rigid_set_is_zero() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", rotation(0.4), [1.0, 2.0]),
            ("b", rotation(2.0), [5.0, 0.0]),
        ],
    );
    let doc = report(&input, "identity");
    assert!(doc["total"].as_f64().unwrap() < 1e-20);
    for t in doc["per_transform"].as_array().unwrap() {
        for key in ["total", "angular", "areal"] {
            assert!(t[key].as_f64().unwrap() < 1e-10);
        }
    }
}

#[test]
fn mdt_reference_beats_every_index() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", [[1.5, 0.3], [0.0, 0.8]], [0.0; 2]),
            ("b", [[0.9, -0.2], [0.4, 1.3]], [0.0; 2]),
            ("c", [[0.6, 0.0], [0.1, 0.7]], [0.0; 2]),
        ],
    );
    let best = report(&input, "mdt")["total"].as_f64().unwrap();
    for j in 0..3 {
        let total = report(&input, &format!("index:{j}"))["total"]
            .as_f64()
            .unwrap();
        assert!(best <= total + 1e-12, "mdt {best} vs index {j} {total}");
    }
}

#[test]
fn single_transform_with_mdt_reference_is_zero() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[("a", [[2.0, 0.5], [0.0, 0.3]], [0.0; 2])],
    );
    assert!(report(&input, "mdt")["total"].as_f64().unwrap() < 1e-20);
}

#[test]
fn invalid_index_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write_set(&dir, "in.json", &[("a", rotation(0.1), [0.0; 2])]);
    let run = mdt(&["report", "--input", s(&input), "--reference", "index:3"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn higher_dimension_report_omits_planar_parts() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("in.json");
    let doc = json!({"version": 1, "dim": 3, "entries": [
        {"id": "a", "A": [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "b": [0.0, 0.0, 0.0]}
    ]});
    std::fs::write(&path, doc.to_string()).unwrap();
    let doc = report(&path, "identity");
    let t = &doc["per_transform"][0];
    assert!(t["angular"].is_null() && t["areal"].is_null());
    assert!((t["total"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

fn rereference(input: &Path, output: &Path) -> Value {
    let run = mdt(&[
        "rereference",
        "--input",
        s(input),
        "--output",
        s(output),
        "-q",
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    read_json(output)
}

#[test]
fn rigid_set_normalises_with_zero_totals() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", rotation(0.2), [10.0, 3.0]),
            ("b", rotation(0.6), [-4.0, 50.0]),
        ],
    );
    let doc = rereference(&input, &dir.path().join("out.json"));
    assert!(doc["report"]["total_after"].as_f64().unwrap() < 1e-20);
    assert!(doc["report"]["total_before_best_fixed"].as_f64().unwrap() < 1e-20);
    // Rotations 0.2 and 0.6 average to 0.4, which the global rotation removes.
    let entries = doc["entries"].as_array().unwrap();
    assert_close(&matrix(&entries[0]["A"]), &rotation(-0.2), 1e-12);
    assert_close(&matrix(&entries[1]["A"]), &rotation(0.2), 1e-12);
}

#[test]
fn rereference_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", [[1.2, 0.3], [-0.1, 0.9]], [0.0, 0.0]),
            ("b", [[0.8, -0.2], [0.25, 1.1]], [70.0, 10.0]),
            ("c", [[1.0, 0.1], [0.0, 1.3]], [20.0, 60.0]),
        ],
    );
    let first = rereference(&input, &dir.path().join("first.json"));
    let second = rereference(
        &dir.path().join("first.json"),
        &dir.path().join("second.json"),
    );
    for (e1, e2) in first["entries"]
        .as_array()
        .unwrap()
        .iter()
        .zip(second["entries"].as_array().unwrap())
    {
        let (a1, a2) = (matrix(&e1["A"]), matrix(&e2["A"]));
        let b1: Vec<f64> = serde_json::from_value(e1["b"].clone()).unwrap();
        let b2: Vec<f64> = serde_json::from_value(e2["b"].clone()).unwrap();
        for (r1, r2) in a1.iter().zip(&a2) {
            for (x, y) in r1.iter().zip(r2) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        for (x, y) in b1.iter().zip(&b2) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = fixture_dir().join("transforms.json");
    let a = rereference(&input, &dir.path().join("a.json"));
    let b = rereference(&input, &dir.path().join("b.json"));
    assert_eq!(a, b);
    let bytes_a = std::fs::read(dir.path().join("a.json")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn reflection_exits_4() {
    let dir = TempDir::new().unwrap();
    let input = write_set(
        &dir,
        "in.json",
        &[
            ("a", [[1.0, 0.0], [0.0, 1.0]], [0.0; 2]),
            ("b", [[-1.0, 0.0], [0.0, 1.0]], [10.0, 0.0]),
        ],
    );
    let run = mdt(&["rereference", "--input", s(&input)]);
    assert_eq!(run.status.code(), Some(4));
}

#[test]
fn missing_sizes_exit_1() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("in.json");
    let doc = json!({"version": 1, "dim": 2, "entries": [{"id": "a", "A": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0]}]});
    std::fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(
        mdt(&["rereference", "--input", s(&path)]).status.code(),
        Some(1)
    );
}

#[test]
fn compose_matches_golden() {
    let dir = TempDir::new().unwrap();
    let fixtures = fixture_dir();
    let png = dir.path().join("pano.png");
    let json = dir.path().join("pano.json");
    let run = mdt(&[
        "compose",
        "--input",
        s(&fixtures.join("transforms.json")),
        "--images",
        s(&fixtures),
        "--output",
        s(&png),
        "--transforms-output",
        s(&json),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(
        std::fs::read(&png).unwrap(),
        std::fs::read(fixtures.join("golden.png")).unwrap()
    );
    assert_eq!(read_json(&json)["entries"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&run.stdout).contains("66x48"));
}

#[test]
fn raw_compose_of_single_identity_image_copies_it() {
    let dir = TempDir::new().unwrap();
    let fixtures = fixture_dir();
    let path = dir.path().join("in.json");
    let doc = json!({"version": 1, "dim": 2, "entries": [{"id": "left", "A": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0]}]});
    std::fs::write(&path, doc.to_string()).unwrap();
    let png = dir.path().join("copy.png");
    let run = mdt(&[
        "compose",
        "--raw",
        "-q",
        "--input",
        s(&path),
        "--images",
        s(&fixtures),
        "--output",
        s(&png),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(
        std::fs::read(&png).unwrap(),
        std::fs::read(fixtures.join("left.png")).unwrap()
    );
}

#[test]
fn estimate_chains_correspondences() {
    let dir = TempDir::new().unwrap();
    // right → left is a pure shift by (30, 2); every point maps exactly.
    let pairs: Vec<[f64; 4]> = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [7.0, 3.0]]
        .iter()
        .map(|p| [p[0], p[1], p[0] + 30.0, p[1] + 2.0])
        .collect();
    let input = dir.path().join("corr.json");
    let doc =
        json!({"version": 1, "entries": [{"from_id": "right", "to_id": "left", "pairs": pairs}]});
    std::fs::write(&input, doc.to_string()).unwrap();
    let out = dir.path().join("set.json");
    let run = mdt(&[
        "estimate",
        "-q",
        "--input",
        s(&input),
        "--output",
        s(&out),
        "--images",
        s(&fixture_dir()),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let set = read_json(&out);
    let entries = set["entries"].as_array().unwrap();
    assert_eq!(entries[0]["id"], "right");
    assert_eq!(entries[1]["id"], "left");
    assert_eq!(entries[1]["width"], 40);
    assert_close(&matrix(&entries[1]["A"]), &[[1.0, 0.0], [0.0, 1.0]], 1e-12);
    let b: Vec<f64> = serde_json::from_value(entries[1]["b"].clone()).unwrap();
    assert!((b[0] + 30.0).abs() < 1e-10 && (b[1] + 2.0).abs() < 1e-10);

    // The result feeds straight into the other commands.
    assert!(mdt(&["rereference", "-q", "--input", s(&out)])
        .status
        .success());
}

#[test]
fn degenerate_correspondences_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("corr.json");
    let doc = json!({"entries": [{"from_id": "a", "to_id": "b", "pairs": [[0, 0, 1, 1], [1, 1, 2, 2], [2, 2, 3, 3]]}]});
    std::fs::write(&input, doc.to_string()).unwrap();
    assert_eq!(
        mdt(&["estimate", "--input", s(&input)]).status.code(),
        Some(2)
    );
}
