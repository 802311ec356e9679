use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn smx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smx"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn hydrogen_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h");
    let o = smx(&["--mode", "hydrogen", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["schema_version"], 1);
    let levels = s["results"]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    assert!((levels[0]["numeric"].as_f64().unwrap() + 0.5).abs() < 5e-5);
    assert!(s["metadata"]["timestamp"].as_u64().is_some());
    let csv = std::fs::read_to_string(out.join("solution_1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,phi"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 3);
    // 17 significant digits
    assert_eq!(
        row[0]
            .split('e')
            .next()
            .unwrap()
            .replace(['.', '-'], "")
            .len(),
        17
    );
    assert!(out.join("hypotheses.json").exists());
}

#[test]
fn minimax_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("m");
    std::fs::write(
        &cfg,
        format!(
            "# minimax levels\nmode = minimax\nomega = -0.1\nk_max = 3\ngrid_n = 2000\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = smx(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let est = s["results"]["estimates"].as_array().unwrap();
    assert_eq!(est.len(), 3);
    for e in est {
        assert_eq!(e["estimate"]["passes"], true);
        assert!(e["estimate"]["c_k_upper"].as_f64().unwrap() < 0.05);
    }
    // flags override the file
    let o = smx(&["--config", cfg.to_str().unwrap(), "--k-max", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        summary(&out)["results"]["estimates"]
            .as_array()
            .unwrap()
            .len(),
        1
    );
    assert_eq!(summary(&out)["config"]["k_max"], 1);
}

#[test]
fn echo_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = smx(&[
        "--mode",
        "multiplicity",
        "--omega",
        "-0.1",
        "--grid-n",
        "1500",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = summary(&out);
    assert!(first["results"]["count"].as_u64().unwrap() >= 3);
    let echo = dir.path().join("echo.json");
    std::fs::copy(out.join("summary.json"), &echo).unwrap();
    let o = smx(&["--config", echo.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let second = summary(&out);
    assert_eq!(first["results"], second["results"]);
    assert_eq!(first["config"], second["config"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = out.to_str().unwrap();

    let r = smx(&["--mode", "solve", "--omega", "0.1", "--out", o]);
    assert_eq!(code(&r), 2);
    assert!(!out.exists(), "config errors leave no artifacts");
    assert_eq!(code(&smx(&["--mode", "solve", "--out", o])), 2);
    assert_eq!(code(&smx(&["--mode", "nope", "--out", o])), 2);
    assert_eq!(
        code(&smx(&[
            "--mode", "hydrogen", "--set", "grid_n=1", "--out", o
        ])),
        2
    );
    assert_eq!(code(&smx(&["--unknown-flag"])), 2);
    assert_eq!(code(&smx(&["--config", "/nonexistent/smx.cfg"])), 2);

    assert_eq!(
        code(&smx(&[
            "--mode",
            "multiplicity",
            "--omega",
            "0",
            "--out",
            o
        ])),
        3
    );
    assert_eq!(
        code(&smx(&["--mode", "minimax", "--omega", "0.2", "--out", o])),
        3
    );
    let y = smx(&[
        "--mode",
        "minimax",
        "--omega",
        "-0.1",
        "--potential",
        "yukawa",
        "--grid-n",
        "1000",
        "--out",
        o,
    ]);
    assert_eq!(code(&y), 3);
    assert!(String::from_utf8_lossy(&y.stderr).contains("(V4) fails"));
    let h: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("hypotheses.json")).unwrap())
            .unwrap();
    assert_eq!(h["failures"], serde_json::json!(["V4"]));

    let r = smx(&[
        "--mode",
        "solve",
        "--omega",
        "-0.1",
        "--grid-n",
        "1000",
        "--set",
        "max_iters=2",
        "--out",
        o,
    ]);
    assert_eq!(code(&r), 4);
    let s = summary(&out);
    assert_eq!(s["results"]["solution"]["converged"], false);
    assert!(out.join("solution_1.csv").exists());
}

#[test]
fn verify_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = smx(&[
        "--mode",
        "verify",
        "--grid-n",
        "1000",
        "--set",
        "formats=json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["results"]["all_pass"], true);
    assert_eq!(s["results"]["checks"].as_array().unwrap().len(), 4);

    let out = dir.path().join("c");
    let o = smx(&[
        "--mode",
        "hydrogen",
        "--grid-n",
        "1000",
        "--set",
        "formats=csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(out.join("solution_1.csv").exists() && !out.join("summary.json").exists());
}
