use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use squash::qstate::werner;

fn squash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squash")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn write_werner(dir: &Path, d: usize, p: f64) -> String {
    let path = dir.join(format!("werner_{d}_{p}.json"));
    let out = squash(&["werner", "--d", &d.to_string(), "--p", &p.to_string(), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

fn load_matrix(path: &str) -> (Vec<usize>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let dims = serde_json::from_value(v["dims"].clone()).unwrap();
    let re = serde_json::from_value(v["matrix"]["re"].clone()).unwrap();
    let im = serde_json::from_value(v["matrix"]["im"].clone()).unwrap();
    (dims, re, im)
}

#[test]
fn werner_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (d, p) in [(2, 0.0), (3, 0.5), (2, 0.3)] {
        let path = write_werner(dir.path(), d, p);
        let (dims, re, im) = load_matrix(&path);
        assert_eq!(dims, vec![d, d]);
        let rho = werner(d, p).unwrap();
        let mut trace = 0.0;
        for i in 0..d * d {
            trace += re[i][i];
            for j in 0..d * d {
                assert!((re[i][j] - rho.matrix()[(i, j)].re).abs() <= 1e-15);
                assert!((im[i][j] - rho.matrix()[(i, j)].im).abs() <= 1e-15);
            }
        }
        assert!((trace - 1.0).abs() <= 1e-12);
    }
    // singlet: weight ½ on |01⟩ and |10⟩, −½ between them
    let (_, re, _) = load_matrix(&write_werner(dir.path(), 2, 0.0));
    assert_eq!((re[1][1], re[2][2], re[1][2], re[0][0]), (0.5, 0.5, -0.5, 0.0));
}

#[test]
fn werner_rejects_bad_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let out = squash(&["werner", "--d", "2", "--p", "1.5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(!path.exists());
}

#[test]
fn quad_prints_rules() {
    let out = squash(&["quad", "--m", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "1,1");

    let out = squash(&["quad", "--m", "2"]);
    let rows: Vec<Vec<f64>> = stdout(&out)
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!((rows[0][0] - 1.0 / 3.0).abs() < 1e-15 && (rows[0][1] - 0.75).abs() < 1e-15);
    assert_eq!(rows[1], vec![1.0, 0.25]);

    assert_eq!(code(&squash(&["quad", "--m", "0"])), 2);
}

#[test]
fn malformed_state_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dims": [2, 2], "matrix": {"re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}}"#).unwrap();
    let out = squash(&["lower", "--state", path.to_str().unwrap(), "--m", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("4x4"));

    std::fs::write(&path, "not json").unwrap();
    assert_eq!(code(&squash(&["upper", "--state", path.to_str().unwrap()])), 2);

    // trace 2
    std::fs::write(&path, r#"{"dims": [1, 2], "matrix": {"re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}}"#).unwrap();
    assert_eq!(code(&squash(&["upper", "--state", path.to_str().unwrap()])), 2);
}

#[test]
fn lower_bound_on_the_singlet() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_werner(dir.path(), 2, 0.0);
    let record = dir.path().join("lower.json");
    let out = squash(&["lower", "--state", &state, "--m", "2", "--tol", "1e-6", "--max-iters", "20000", "--out", record.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let value = field(&text, "value ");
    assert!(value <= 11.0 / (16.0 * std::f64::consts::LN_2) + 1e-4, "{value}");
    // the m = 2 relaxation is loose but still certifies entanglement
    assert!(value > 0.4, "{value}");

    let rec: Value = serde_json::from_str(&std::fs::read_to_string(&record).unwrap()).unwrap();
    assert_eq!(rec["command"], "lower");
    assert_eq!(rec["parameters"]["m"], 2);
    assert_eq!(rec["result"]["kind"], "lower_sdp");
    assert_eq!(rec["input_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn upper_bound_commands() {
    let dir = tempfile::tempdir().unwrap();
    let singlet = write_werner(dir.path(), 2, 0.0);
    let out = squash(&["upper", "--state", &singlet, "--d-d", "1", "--d-e", "1", "--restarts", "2"]);
    assert_eq!(code(&out), 0);
    assert!((field(&stdout(&out), "value ") - 1.0).abs() <= 1e-6);

    let mixed = write_werner(dir.path(), 2, 0.3);
    let out = squash(&["upper", "--state", &mixed, "--d-d", "1", "--d-e", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn figure1_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let csv_s = csv.to_str().unwrap();
    let out = squash(&["figure1", "--m", "1", "--d-d", "2", "--d-e", "2", "--restarts", "1", "--p-grid", "0.5,0", "--out", csv_s]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "p", "lower_raw", "lower_clamped", "upper", "m", "k", "d_D", "d_E",
            "status_lower", "status_upper", "seconds_lower", "seconds_upper"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "0.5");
    assert_eq!(&rows[1][0], "0");
    for row in &rows {
        let lower: f64 = row[1].parse().unwrap();
        let upper: f64 = row[3].parse().unwrap();
        assert!(lower <= upper + 1e-3, "{lower} > {upper}");
        assert_eq!(row[2].parse::<f64>().unwrap(), lower.max(0.0));
    }

    assert_eq!(code(&squash(&["figure1", "--p-grid", "", "--out", csv_s])), 2);
    assert_eq!(code(&squash(&["figure1", "--p-grid", " , ", "--out", csv_s])), 2);
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_werner(dir.path(), 2, 0.2);
    let a = dir.path().join("a.dat-s");
    let b = dir.path().join("b.dat-s");
    for path in [&a, &b] {
        let out = squash(&["export", "--state", &state, "--m", "2", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    let meta = squash::solver::sdpa::read_meta(&text).unwrap();
    assert_eq!((meta.m, meta.k, meta.dims), (2, 1, vec![2, 2]));
    let inst = squash::solver::sdpa::parse(&text).unwrap();
    assert!(inst.side > 0 && inst.num_constraints() > 0);
}
