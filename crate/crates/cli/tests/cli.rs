use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use wignerlab_core::harness::validate_report;

const SUBCOMMANDS: [&str; 10] = [
    "sample",
    "locallaw",
    "rigidity",
    "deloc",
    "repulsion",
    "reconstruct",
    "compare",
    "gfct",
    "hs-check",
    "selftest",
];

fn wignerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .args(args)
        .env_remove("WIGNERLAB_SEED")
        .env_remove("WIGNERLAB_N")
        .env_remove("WIGNERLAB_TRIALS")
        .env_remove("WIGNERLAB_PARALLELISM")
        .env_remove("WIGNERLAB_OUT")
        .env_remove("WIGNERLAB_CSV")
        .output()
        .expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn body(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("metadata");
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn selftest_exits_zero() {
    let o = wignerlab(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    validate_report(&v).unwrap();
    assert!(v["summary"]["passed"].as_bool().unwrap());
}

#[test]
fn compare_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("edge-compare.toml");
    let mut bodies = Vec::new();
    for (k, par) in ["1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{k}.json"));
        let csv = dir.path().join(format!("r{k}.csv"));
        let o = wignerlab(&[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "7",
            "--N",
            "40,60",
            "--trials",
            "30",
            "--parallelism",
            par,
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let mut b = body(&text);
        b["config"].as_object_mut().unwrap().remove("parallelism");
        bodies.push((serde_json::to_string(&b).unwrap(), std::fs::read(&csv).unwrap()));
    }
    assert_eq!(bodies[0].0, bodies[1].0);
    assert_eq!(bodies[0].1, bodies[1].1);

    let a = wignerlab(&["compare", "--config", cfg.to_str().unwrap(), "--seed", "7", "--N", "40", "--trials", "20"]);
    let b = wignerlab(&["compare", "--config", cfg.to_str().unwrap(), "--seed", "7", "--N", "40", "--trials", "20"]);
    let strip = |o: &Output| {
        let text = String::from_utf8(o.stdout.clone()).unwrap();
        let start = text.find("\"metadata\"").unwrap();
        let end = start + text[start..].find('}').unwrap();
        format!("{}{}", &text[..start], &text[end..])
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "sizes = [100\n",
        "sizes = []\n",
        "trials = 0\n",
        "[knobs]\neps = 2.0\n",
        "[knobs]\nnot_a_knob = 1\n",
        "experiment = \"rigidity\"\n",
        "[ensemble]\nsymmetry = \"real_symmetric\"\nlaw = \"cauchy\"\n",
        "[ensemble]\nsymmetry = \"complex_hermitian\"\nlaw = \"three_point\"\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{k}.toml"));
        std::fs::write(&p, text).unwrap();
        let o = wignerlab(&["locallaw", "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"), "case {k}");
        assert!(o.stdout.is_empty());
    }
    assert_eq!(wignerlab(&["locallaw", "--N", "ten"]).status.code(), Some(2));
    assert_eq!(wignerlab(&["locallaw", "--seed", "-1"]).status.code(), Some(2));
    assert_eq!(wignerlab(&["compare", "--N", "1"]).status.code(), Some(2));
    assert_eq!(wignerlab(&["bogus"]).status.code(), Some(2));
}

#[test]
fn env_overrides_apply_below_flags() {
    let o = Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .args(["rigidity", "--trials", "3"])
        .env("WIGNERLAB_N", "30")
        .env("WIGNERLAB_TRIALS", "50")
        .env("WIGNERLAB_SEED", "99")
        .output()
        .unwrap();
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["sizes"], serde_json::json!([30]));
    assert_eq!(v["config"]["trials"], 3);
    assert_eq!(v["config"]["seed"], 99);
    let bad = Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .arg("rigidity")
        .env("WIGNERLAB_TRIALS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn locallaw_reports_per_gridpoint_ratios() {
    let o = wignerlab(&["locallaw", "--N", "120", "--trials", "6", "--seed", "3"]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let size = &v["results"]["sizes"][0];
    assert_eq!(size["n"], 120);
    let grid = size["grid"].as_array().expect("grid table");
    assert!(grid.len() > 10);
    for g in grid {
        for key in ["max_average_ratio", "median_average_ratio", "max_entrywise_ratio", "median_entrywise_ratio"] {
            let r = g[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {g}"));
            assert!(r.is_finite() && r >= 0.0);
        }
    }
}

#[test]
fn every_subcommand_emits_a_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in SUBCOMMANDS {
        let out = dir.path().join(format!("{cmd}.json"));
        let csv = dir.path().join(format!("{cmd}.csv"));
        let o = wignerlab(&[
            cmd,
            "--N",
            "40",
            "--trials",
            "6",
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{cmd}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{cmd} wrote to stdout despite --out");
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        validate_report(&v).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        assert_eq!(v["experiment"], cmd);
        let passed = v["summary"]["passed"].as_bool().unwrap();
        assert_eq!(o.status.code(), Some(if passed { 0 } else { 1 }), "{cmd}");
        let table = std::fs::read_to_string(&csv).unwrap();
        if cmd != "selftest" {
            let mut rdr = csv::Reader::from_reader(table.as_bytes());
            let width = rdr.headers().unwrap().len();
            let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
            assert!(!rows.is_empty(), "{cmd}");
            assert!(rows.iter().all(|r| r.len() == width));
        }
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let kind: toml::Value = toml::from_str(&text).unwrap();
        let cmd = kind["experiment"].as_str().unwrap().to_string();
        let out = dir.path().join("r.json");
        let o = wignerlab(&[
            &cmd,
            "--config",
            path.to_str().unwrap(),
            "--N",
            "60",
            "--trials",
            "6",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{}: {}", path.display(), stderr(&o));
        seen += 1;
    }
    assert!(seen >= 5);
}
