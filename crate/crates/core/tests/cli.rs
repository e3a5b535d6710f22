use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn symspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symspin"))
        .args(args)
        .env_remove("SYMSPIN_TOLERANCE_PROFILE")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn same_shape(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300) || x == y {
                Ok(())
            } else {
                Err(format!("{path}: {x} != {y}"))
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<_> = x.keys().collect();
            let ky: Vec<_> = y.keys().collect();
            if kx != ky {
                return Err(format!("{path}: keys {kx:?} != {ky:?}"));
            }
            x.iter()
                .try_for_each(|(k, v)| same_shape(v, &y[k], &format!("{path}.{k}")))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} != {}", x.len(), y.len()));
            }
            x.iter()
                .zip(y)
                .enumerate()
                .try_for_each(|(i, (u, v))| same_shape(u, v, &format!("{path}[{i}]")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} != {b}")),
    }
}

fn check_golden(name: &str, actual: &Value) {
    let path = golden_path(name);
    if std::env::var_os("SYMSPIN_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let expected: Value = serde_json::from_str(&text).unwrap();
    if let Err(e) = same_shape(&expected, actual, "$") {
        panic!("golden {name} mismatch at {e}");
    }
}

#[test]
fn verify_passes_for_supported_models() {
    for (l, n) in [("1", "16"), ("2", "8")] {
        let o = symspin(&["verify", "--l", l, "--cutoff", n, "--format", "json"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let r = json(&o);
        assert_eq!(r["verdict"], true);
        let rows = r["results"].as_array().unwrap();
        assert!(rows.len() >= 7);
        assert!(rows.iter().all(|row| row["pass"] == true));
    }
}

#[test]
fn verify_rejects_zero_half_dimension() {
    let o = symspin(&["verify", "--l", "0", "--cutoff", "4"]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn verify_fails_with_impossible_tolerance() {
    let o = symspin(&["verify", "--l", "1", "--cutoff", "8", "--tolerance", "1e-300"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sphere_spectrum_table() {
    let o = symspin(&[
        "spectrum", "--case", "sphere", "--radius", "1", "--count", "3", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    let rows = r["results"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        let n = i / 2;
        assert_eq!(row["n"], n);
        let expected = ((2 * n + 1) as f64 / 2.0).sqrt() * if i % 2 == 0 { 1.0 } else { -1.0 };
        assert!((row["lambda_im"].as_f64().unwrap() - expected).abs() < 1e-12);
        assert_eq!(row["lambda_re"].as_f64().unwrap(), 0.0);
    }
    check_golden("spectrum_sphere.json", &without_timestamp(r));
}

#[test]
fn flat_spectrum_is_single_zero() {
    let o = symspin(&["spectrum", "--case", "flat", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,eigenvalue,lambda_re,lambda_im,lambda");
    assert!(lines[1].starts_with("0,0.0,0.0,0.0"));
}

#[test]
fn empty_spectrum_is_header_only() {
    let o = symspin(&["spectrum", "--case", "sphere", "--count", "0", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "n,eigenvalue,lambda_re,lambda_im,lambda");
}

#[test]
fn perturbed_spectrum_is_unsupported() {
    let o = symspin(&["spectrum", "--case", "perturbed"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn killing_flat_certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("flat.json");
    let c = cert.to_str().unwrap();
    let o = symspin(&[
        "killing-flat",
        "--l",
        "1",
        "--cutoff",
        "6",
        "--grid",
        "17",
        "--certificate",
        c,
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let row = &json(&o)["results"][0];
    assert_eq!(row["kind"], "rigidity");
    assert_eq!(row["details"]["kernel_dim"], 6);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(&saved, row);

    let o = symspin(&["report", "--input", c, "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(&json(&o)["results"][0], row);
}

#[test]
fn killing_sphere_small_grid() {
    let args = [
        "killing-sphere",
        "--theta-nodes",
        "24",
        "--fourier-modes",
        "4",
        "--n-max",
        "1",
        "--cutoff",
        "10",
        "--format",
        "json",
    ];
    let o = symspin(&args);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = without_timestamp(json(&o));
    assert_eq!(r["results"][0]["kind"], "nonexistence");
    check_golden("killing_sphere_small.json", &r);

    let again = symspin(&args);
    assert_eq!(without_timestamp(json(&again)), r);
}

#[test]
fn fabricated_sphere_solution_flips_verdict() {
    let o = symspin(&[
        "killing-sphere",
        "--theta-nodes",
        "24",
        "--fourier-modes",
        "4",
        "--n-max",
        "1",
        "--cutoff",
        "10",
        "--fabricate",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["results"][0]["kind"], "existence");
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let args = [
        "killing-flat",
        "--l",
        "1",
        "--cutoff",
        "4",
        "--grid",
        "5",
        "--format",
        "json",
    ];
    let a = stdout(&symspin(&args));
    let b = stdout(&symspin(&args));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_file_is_applied_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "l = 2\ncutoff = 6\n").unwrap();
    let c = cfg.to_str().unwrap();
    let r = json(&symspin(&["--config", c, "verify", "--format", "json"]));
    assert_eq!(r["params"]["l"], 2);
    assert_eq!(r["params"]["cutoff"], 6);
    let r = json(&symspin(&[
        "--config", c, "verify", "--cutoff", "8", "--format", "json",
    ]));
    assert_eq!(r["params"]["cutoff"], 8);
}

#[test]
fn bad_configuration_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(code(&symspin(&["--config", cfg.to_str().unwrap(), "verify"])), 2);
    assert_eq!(code(&symspin(&["--config", "/nonexistent/run.toml", "verify"])), 2);
    assert_eq!(code(&symspin(&["killing-sphere", "--theta-nodes", "4"])), 2);
    assert_eq!(code(&symspin(&["report", "--input", "/nonexistent.json"])), 2);
    assert_eq!(code(&symspin(&["no-such-command"])), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_symspin"))
        .args(["verify", "--cutoff", "8"])
        .env("SYMSPIN_TOLERANCE_PROFILE", "weird")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn strict_profile_tightens_tolerances() {
    let o = Command::new(env!("CARGO_BIN_EXE_symspin"))
        .args(["verify", "--cutoff", "8", "--format", "json"])
        .env("SYMSPIN_TOLERANCE_PROFILE", "strict")
        .output()
        .unwrap();
    let r = json(&o);
    assert_eq!(r["params"]["profile"], "strict");
    assert!((r["params"]["tolerances"]["commutator"].as_f64().unwrap() - 1e-13).abs() < 1e-25);
}

#[test]
fn help_exits_zero() {
    let o = symspin(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("killing-sphere"));
}
