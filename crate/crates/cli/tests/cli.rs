//! The `eroi` binary end to end: exit codes and the files each command writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eroi_core::fixtures;
use eroi_core::gsa::UncertainParameter;
use eroi_core::io::{save, Dataset, Meta};

fn eroi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eroi")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn mini_be() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini-be")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The two-fuel toy with both fuels uncertain, written as a bundle.
fn toy_bundle(dir: &Path) -> PathBuf {
    let path = dir.join("toy");
    let ds = Dataset {
        model: fixtures::two_fuel_toy(),
        uncertain: vec![
            UncertainParameter::relative("resource.CLEAN.e_op", 0.25).unwrap(),
            UncertainParameter::relative("resource.DIRTY.e_op", 0.25).unwrap(),
        ],
        meta: Meta {
            name: "toy".into(),
            ..Meta::default()
        },
    };
    save(&ds, &path).unwrap();
    path
}

fn csv_rows(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    (header, r.records().map(Result::unwrap).collect())
}

#[test]
fn run_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("run.json");
    let out = eroi(&["run", "--dataset", s(&mini_be()), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("EROI"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["status"], "optimal");
    assert!(json["eroi"].as_f64().unwrap() > 1.0);
}

#[test]
fn infeasible_cap_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("run.json");
    let out = eroi(&[
        "run",
        "--dataset",
        s(&mini_be()),
        "--gwp-limit",
        "0",
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["status"], "infeasible");
    assert!(json["eroi"].is_null());
}

#[test]
fn missing_dataset_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = eroi(&[
        "run",
        "--dataset",
        s(&dir.path().join("nowhere")),
        "--out",
        s(&dir.path().join("run.json")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("missing file"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    assert_eq!(code(&eroi(&["run", "--no-such-flag"])), 64);
    assert_eq!(code(&eroi(&["frobnicate"])), 64);
    assert_eq!(code(&eroi(&["--help"])), 0);
}

#[test]
fn unknown_objective_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_bundle(dir.path());
    let out = eroi(&[
        "run",
        "--dataset",
        s(&toy),
        "--objective",
        "cost",
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("unknown objective"));
}

#[test]
fn sweep_writes_reference_and_twenty_steps() {
    let dir = tempfile::tempdir().unwrap();
    let frontier = dir.path().join("frontier.csv");
    let reports = dir.path().join("runs");
    let out = eroi(&[
        "sweep",
        "--dataset",
        s(&mini_be()),
        "--step",
        "0.05",
        "--out",
        s(&frontier),
        "--reports",
        s(&reports),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&frontier);
    assert_eq!(&header[0], "gwp_limit_mt");
    assert_eq!(&header[2], "eroi");
    assert_eq!(rows.len(), 21);
    assert_eq!(&rows[0][0], "");
    assert_eq!(&rows[1][1], "optimal");
    assert_eq!(fs::read_dir(&reports).unwrap().count(), 21);

    let mut inputs: Vec<PathBuf> = fs::read_dir(&reports).unwrap().map(|e| e.unwrap().path()).collect();
    inputs.sort();
    let tables = dir.path().join("tables");
    let mut args = vec![
        "report".to_string(),
        "--out".into(),
        s(&tables).into(),
        "--input".into(),
    ];
    args.extend(inputs.iter().map(|p| s(p).to_string()));
    let out = eroi(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&tables.join("summary.csv"));
    assert_eq!(&header[0], "label");
    assert_eq!(rows.len(), 21);
    assert_eq!(&rows[0][0], "run_00");
    let (header, rows) = csv_rows(&tables.join("mix.csv"));
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["label", "resource", "category", "renewable", "gwh", "share"]
    );
    assert!(!rows.is_empty());
}

#[test]
fn export_lp_includes_the_cap_row() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_bundle(dir.path());
    let path = dir.path().join("toy.lp");
    let out = eroi(&[
        "export-lp",
        "--dataset",
        s(&toy),
        "--gwp-limit",
        "0.15",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("Minimize") && text.contains("Subject To"));
    assert!(text.contains("150000"), "{text}");
}

#[test]
fn gsa_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_bundle(dir.path());
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = eroi(&[
            "gsa",
            "--dataset",
            s(&toy),
            "--gwp-limit",
            "0.15",
            "--seed",
            "3",
            "--pdf-samples",
            "20000",
            "--bins",
            "20",
            "--out",
            s(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["screening.json", "sobol.json", "indices.csv", "pdf.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (header, rows) = csv_rows(&a.join("indices.csv"));
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["parameter", "total_order", "critical"]
    );
    // Under the cap the clean fuel's energy term carries most of the variance.
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "resource.CLEAN.e_op");
}

#[test]
fn gsa_without_uncertain_parameters_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bare");
    let ds = Dataset {
        model: fixtures::two_fuel_toy(),
        uncertain: Vec::new(),
        meta: Meta::default(),
    };
    save(&ds, &path).unwrap();
    let out = eroi(&["gsa", "--dataset", s(&path), "--out", s(&dir.path().join("g"))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("uncertain"));
}
