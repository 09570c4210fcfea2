use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use biortho::io::read_matrix;
use biortho::matgen::e1_eigenvalues;
use biortho::Complex;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_biortho"));
    c.env_remove("BIORTHO_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn generate(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = p(dir, name);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", s(&out)]);
    let o = run(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn write_diag(dir: &TempDir, name: &str, re: &[f64], im: &[f64]) -> PathBuf {
    let n = re.len();
    let mut r = vec![vec![0.0; n]; n];
    let mut i = vec![vec![0.0; n]; n];
    for k in 0..n {
        r[k][k] = re[k];
        i[k][k] = im[k];
    }
    let path = p(dir, name);
    fs::write(&path, serde_json::json!({"n": n, "re": r, "im": i}).to_string()).unwrap();
    path
}

fn result_lambda(v: &Value) -> Complex {
    Complex::new(v["lambda_re"].as_f64().unwrap(), v["lambda_im"].as_f64().unwrap())
}

fn trace_records(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn generate_swanson_corner_entry_and_metadata() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "swanson.json", &["swanson", "--n", "7", "--theta", "0.4"]);
    let a = read_matrix(&m).unwrap();
    assert!((a[(0, 0)].re - 0.348126).abs() < 1e-3);
    let meta = json(&p(&dir, "swanson.meta.json"));
    assert_eq!(meta["kind"], "swanson");
    assert_eq!(meta["theta"], 0.4);
}

#[test]
fn generate_hessenberg_is_upper_hessenberg() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "h.json", &["hessenberg", "--seq", "exp-k2", "--n", "15"]);
    let a = read_matrix(&m).unwrap();
    assert_eq!(a.n(), 15);
    assert!(a.is_upper_hessenberg());
}

#[test]
fn generate_random_is_deterministic_and_env_seed_wins() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["random", "--n", "3", "--seed", "42"]);
    let b = generate(&dir, "b.json", &["random", "--n", "3", "--seed", "42"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c = p(&dir, "c.json");
    let o = bin()
        .args(["generate", "random", "--n", "3", "--seed", "42", "-o", s(&c)])
        .env("BIORTHO_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(json(&p(&dir, "c.meta.json"))["seed"], 7);
}

#[test]
fn floats_carry_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "r.json", &["random", "--n", "2", "--seed", "1"]);
    let text = fs::read_to_string(&m).unwrap();
    let a = read_matrix(&m).unwrap();
    let v = a[(0, 0)].re;
    assert!(text.contains(&format!("{v:.16e}")) || text.contains(&format!("{v:.17}")), "{text}");
}

#[test]
fn solve_e1_flow_largest_with_trace() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    let o = run(&["solve", s(&m), "--method", "flow", "--mode", "largest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&p(&dir, "e1.flow.result.json"));
    assert!((result_lambda(&r) - Complex::new(1.5181, -1.2564)).norm() < 1e-3);
    assert_eq!(r["status"], "converged");

    let t = trace_records(&p(&dir, "e1.flow.trace.jsonl"));
    assert!(t.len() > 2);
    for w in t.windows(2) {
        assert!(w[1]["step"].as_u64() > w[0]["step"].as_u64());
        assert!(w[1]["t"].as_f64() > w[0]["t"].as_f64());
    }
    let last = t.last().unwrap();
    assert!(last["residual"].as_f64().unwrap() < 1e-8);
    for key in ["step", "lambda_re", "lambda_im", "residual"] {
        assert!(last.get(key).is_some(), "{key}");
    }
}

#[test]
fn solve_e1_inverse_at_printed_shift() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    let o = run(&["solve", s(&m), "--method", "inverse", "--shift", "\u{2212}1.3,1.3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&p(&dir, "e1.inverse.result.json"));
    assert!((result_lambda(&r) - Complex::new(-1.3201, 1.2896)).norm() < 1e-3);
    assert_eq!(r["shift"][0], -1.3);
}

#[test]
fn solve_with_deflation_finds_next_real_part() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    let first = p(&dir, "first.json");
    let o = run(&["solve", s(&m), "--result", s(&first)]);
    assert_eq!(code(&o), 0);
    let second = p(&dir, "second.json");
    let o = run(&["solve", s(&m), "--deflate", s(&first), "--result", s(&second)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&second);
    assert_eq!(r["deflated"], 1);
    assert!((result_lambda(&r) - e1_eigenvalues()[1]).norm() < 1e-3);
}

#[test]
fn solve_identity_power_in_two_iterations() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "id.json", &["identity", "--n", "4"]);
    let o = run(&["solve", s(&m), "--method", "power"]);
    assert_eq!(code(&o), 0);
    let r = json(&p(&dir, "id.power.result.json"));
    assert!((result_lambda(&r) - Complex::new(1.0, 0.0)).norm() < 1e-14);
    assert!(r["iterations"].as_u64().unwrap() <= 2);
}

#[test]
fn modulus_tie_exits_with_breakdown_code() {
    let dir = TempDir::new().unwrap();
    let m = write_diag(&dir, "tie.json", &[1.0, -1.0, 0.3], &[0.0; 3]);
    let o = run(&["solve", s(&m), "--method", "power"]);
    assert_eq!(code(&o), 3);
    let r = json(&p(&dir, "tie.power.result.json"));
    assert_eq!(r["status"], "dominance_tie");
    assert_eq!(r["exit_code"], 3);
}

#[test]
fn real_part_tie_exits_without_convergence() {
    let dir = TempDir::new().unwrap();
    let m = write_diag(&dir, "rtie.json", &[1.0, 1.0, 0.0], &[1.0, -1.0, 0.0]);
    let o = run(&["solve", s(&m), "--method", "flow"]);
    assert_eq!(code(&o), 2);
    let r = json(&p(&dir, "rtie.flow.result.json"));
    assert_eq!(r["converged"], false);
    let t = trace_records(&p(&dir, "rtie.flow.trace.jsonl"));
    assert!(t.last().unwrap()["residual"].as_f64().unwrap() >= 1e-8);
}

#[test]
fn max_iter_cap_gives_no_convergence_code() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    let o = run(&["solve", s(&m), "--method", "power", "--max-iter", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn io_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let o = run(&["solve", s(&p(&dir, "missing.json"))]);
    assert_eq!(code(&o), 4);
    let o = run(&["solve", s(&p(&dir, "missing.json")), "--method", "bogus"]);
    assert_eq!(code(&o), 1);
    let m = generate(&dir, "e1.json", &["e1"]);
    let o = run(&["solve", s(&m), "--method", "flow", "--shift", "1,1"]);
    assert_eq!(code(&o), 1);
    let o = run(&["generate", "swanson", "--theta", "2", "-o", s(&p(&dir, "x.json"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn exact_shift_is_reported_as_breakdown() {
    let dir = TempDir::new().unwrap();
    let m = write_diag(&dir, "d.json", &[2.0, 1.0], &[0.0, 0.0]);
    let o = run(&["solve", s(&m), "--method", "inverse", "--shift", "2,0"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_outputs() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    assert_eq!(code(&run(&["oracle", s(&m)])), 0);
    let v = json(&p(&dir, "e1.spectrum.json"));
    let eigs: Vec<Complex> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| Complex::new(z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect();
    for (got, want) in eigs.iter().zip(e1_eigenvalues()) {
        assert!((got - want).norm() < 1e-3, "{got} vs {want}");
    }

    let h = generate(&dir, "sw.json", &["swanson"]);
    assert_eq!(code(&run(&["oracle", s(&h)])), 0);
    assert_eq!(json(&p(&dir, "sw.spectrum.json"))["real_spectrum"], true);

    let r = generate(&dir, "rot.json", &["rotation"]);
    assert_eq!(code(&run(&["oracle", s(&r)])), 0);
    let v = json(&p(&dir, "rot.spectrum.json"));
    assert!((v["eigenvalues"][0][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["eigenvalues"][1][1].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn plot_writes_svg() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "e1.json", &["e1"]);
    assert_eq!(code(&run(&["solve", s(&m)])), 0);
    let svg = p(&dir, "fig.svg");
    let o = run(&["plot", s(&p(&dir, "e1.flow.trace.jsonl")), "-o", s(&svg)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.matches("<polyline").count() == 3);
}

#[test]
fn experiment_e3_passes_and_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let out = s(dir.path());
    let o = run(&["experiment", "e3", "--out-dir", out, "--deterministic"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let first = fs::read(p(&dir, "e3-report.json")).unwrap();
    assert_eq!(code(&run(&["experiment", "e3", "--out-dir", out, "--deterministic"])), 0);
    assert_eq!(first, fs::read(p(&dir, "e3-report.json")).unwrap());
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert!(v.get("created_unix").is_none());
    for r in v["records"].as_array().unwrap() {
        assert!(!r["oracle_lambda"].is_null() || !r["oracle_skip"].is_null());
        if let Some(t) = r["trace"].as_str() {
            assert!(dir.path().join(t).exists(), "{t}");
        }
    }
}

#[test]
fn experiment_e1_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["experiment", "e1", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&p(&dir, "e1-report.json"));
    assert_eq!(v["pass"], true);
    assert!(v["created_unix"].is_u64());
    let labels: Vec<&str> =
        v["records"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert!(labels.iter().any(|l| l.ends_with("finds lambda_5")));
    assert!(labels.iter().any(|l| l.ends_with("finds lambda_7")));
}

/// The printed Hessenberg values are not reproduced by the exact spectrum
/// of either reading of the factorial sequence, so the run reports failed
/// bounds through its exit status while still writing a complete report.
#[test]
fn experiment_e2_reports_failed_bounds() {
    let dir = TempDir::new().unwrap();
    let o = run(&["experiment", "e2", "--out-dir", s(dir.path()), "--deterministic"]);
    assert_eq!(code(&o), 5);
    let v = json(&p(&dir, "e2-report.json"));
    assert_eq!(v["pass"], false);
    assert_eq!(v["matrix_metadata"].as_array().unwrap().len(), 3);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
}
