use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = "\
[grid]
half_width = 8
samples = 128
[space]
components = 3
[sweep]
magnitudes = 5
lambda_max = 100
probes_per_family = 1
";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov-lab")).args(args).output().expect("binary runs")
}

fn run_cfg(dir: &TempDir, cmd: &str, text: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.path().join(format!("{cmd}.cfg"));
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (run(&args), out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn norm_fixture_matches_continuum_oracle() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["norm", "--config", fixture("gaussian_norm.cfg").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let got = json(&out.join("norm.json"));
    let want = json(&fixture("gaussian_norm_expected.json"));
    let r = &got["result"];
    let close = |a: &Value, b: &Value, tol: f64| {
        let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
        assert!((a - b).abs() <= tol * b.abs(), "{a} vs {b} (tol {tol})");
    };
    close(&r["fourier"]["norm"], &want["fourier"], 1e-6);
    for k in 0..4 {
        close(&r["fourier"]["block_norms"][k], &want["block_norms"][k], 1e-5);
    }
    close(&r["lq_norm"], &want["lq_norm"], 1e-12);
    // The difference norm carries the y-quadrature error.
    close(&r["difference"]["norm"], &want["difference"], 1e-3);
    close(&r["ratio"], &want["ratio"], 1e-3);
    assert_eq!(got["schema"], "besov-lab/report/v1");
    assert_eq!(got["provenance"]["grid"]["samples"], 2048);
}

#[test]
fn non_elliptic_sweep_exits_2_with_xi() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SMALL}[problem]\na[2] = 1\n");
    let (o, _) = run_cfg(&dir, "sweep", &text, &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("ellipticity") && e.contains("ξ = ["), "{e}");
}

#[test]
fn solve_single_mode_residual_and_closed_form() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SMALL}[problem]\nrhs = mode\nkappa = 1\nlambda = 2, 1\namplitude = \"1/m^2\"\n");
    let (o, out) = run_cfg(&dir, "solve", &text, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("solve.json"));
    assert!(r["result"]["residual_l2"].as_f64().unwrap() < 1e-9);
    let fields = json(&out.join("solve_fields.json"));
    let u = &fields["solution"];
    let res = &fields["residual"];
    assert_eq!(u["components"], 3);
    // κ snaps to the grid: ξ spacing is π/8, so κ = 1 becomes 3π/8.
    let kappa = 3.0 * std::f64::consts::PI / 8.0;
    let h = 16.0 / 128.0;
    for node in [0usize, 17, 64, 127] {
        let x = -8.0 + node as f64 * h;
        for m in 1..=3usize {
            let d = (m * m) as f64;
            let den = num_complex::Complex64::new(d + 2.0 + kappa * kappa, 1.0);
            let want = num_complex::Complex64::from_polar(1.0 / d, kappa * x) / den;
            let v = &u["values"][node * 3 + m - 1];
            let got = num_complex::Complex64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
            assert!((got - want).norm() < 1e-12, "node {node}, m = {m}: {got} vs {want}");
            let rv = &res["values"][node * 3 + m - 1];
            assert!(rv[0].as_f64().unwrap().abs() < 1e-12 && rv[1].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.contains("\"timestamp_unix\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn sweep_report_is_deterministic_and_seeded() {
    let dir = TempDir::new().unwrap();
    let (a, out) = run_cfg(&dir, "sweep", SMALL, &["--format", "csv"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let first = std::fs::read_to_string(out.join("sweep.json")).unwrap();
    let table = std::fs::read_to_string(out.join("sweep_table.csv")).unwrap();
    assert!(table.starts_with("ray,magnitude,lambda_re,lambda_im,probe,ratio"));
    let (b, _) = run_cfg(&dir, "sweep", SMALL, &["--format", "csv"]);
    assert_eq!(b.status.code(), Some(0));
    let second = std::fs::read_to_string(out.join("sweep.json")).unwrap();
    assert_eq!(strip_timestamp(&first), strip_timestamp(&second));
    let (c, _) = run_cfg(&dir, "sweep", SMALL, &["--seed", "99"]);
    assert_eq!(c.status.code(), Some(0));
    let third = json(&out.join("sweep.json"));
    assert_eq!(third["provenance"]["seed"], 99);
    assert_ne!(json(&out.join("sweep.json"))["result"]["sup"], serde_json::from_str::<Value>(&first).unwrap()["result"]["sup"]);
}

#[test]
fn check_symbol_and_embed_pass() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_cfg(&dir, "check-symbol", SMALL, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("check-symbol.json"));
    assert_eq!(r["status"], "pass");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "sup sigma1 <= 1 + M"));
    let text = format!("{SMALL}[embed]\nalpha = 1\nl = 3\nkernel = gaussian(0.7, 0.8)\n");
    let (o, out) = run_cfg(&dir, "embed", &text, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&out.join("embed.json"))["status"], "pass");
}

#[test]
fn convolution_and_system_solves() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SMALL}[problem]\nfamily = convolution\nlambda = 3\n");
    let (o, out) = run_cfg(&dir, "solve", &text, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("solve.json"));
    assert!(r["result"]["residual_relative"].as_f64().unwrap() < 1e-8);
    let text = format!("{SMALL}[problem]\nfamily = system\nrhs = mode\ntruncations = 2, 4, 8\n");
    let (o, out) = run_cfg(&dir, "solve", &text, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("solve.json"));
    assert_eq!(r["result"]["table"].as_array().unwrap().len(), 2);
    assert_eq!(r["result"]["monotone"], true);
}

#[test]
fn report_runs_every_section() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_cfg(&dir, "report", SMALL, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    for s in ["norm", "solve", "check-symbol", "sweep", "embed"] {
        assert_eq!(r["result"][s]["status"], "pass", "{s}");
    }
}

#[test]
fn exit_codes_for_usage_config_and_numeric_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let (o, _) = run_cfg(&dir, "norm", "[grid]\nbogus = 1\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
    let (o, _) = run_cfg(&dir, "norm", "[besov]\nq1 = 4\nq2 = 2\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let text = format!("{SMALL}[problem]\namplitude = \"sqrt(2 - m)\"\n");
    let (o, _) = run_cfg(&dir, "norm", &text, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
