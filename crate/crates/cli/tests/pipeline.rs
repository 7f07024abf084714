use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use riskprobe::pipeline::{Pipeline, Stage};

fn fixture(task: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(task).join("run.json")
}

fn pipeline(task: &str, out: &Path) -> Pipeline {
    let mut p = Pipeline::from_file(&fixture(task)).unwrap();
    p.config_mut().output_dir = out.to_path_buf();
    p
}

fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir.join("report"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn rerun_reproduces_the_report_byte_for_byte() {
    for task in ["commonsense", "relational", "cnli"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        pipeline(task, a.path()).run().unwrap();
        let first = report_files(a.path());
        pipeline(task, a.path()).run().unwrap();
        assert_eq!(first, report_files(a.path()), "{task}: rerun in place");
        pipeline(task, b.path()).run().unwrap();
        assert_eq!(first, report_files(b.path()), "{task}: fresh directory");
        assert!(first.iter().any(|(n, _)| n == "report.json"));
    }
}

#[test]
fn rerun_reuses_cached_responses() {
    let dir = tempfile::tempdir().unwrap();
    pipeline("commonsense", dir.path()).run().unwrap();
    let log = fs::read_to_string(dir.path().join("responses.jsonl")).unwrap();
    pipeline("commonsense", dir.path()).run().unwrap();
    assert_eq!(log, fs::read_to_string(dir.path().join("responses.jsonl")).unwrap());
}

#[test]
fn fit_without_labels_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = pipeline("commonsense", dir.path());
    p.run().unwrap();
    fs::remove_file(dir.path().join("labels.jsonl")).unwrap();
    let err = p.run_from(Stage::Fit).unwrap_err();
    assert_eq!(err.stage, Stage::Fit);
    assert!(err.to_string().starts_with("fit stage failed"), "{err}");
}

#[test]
fn binary_reports_stage_failures() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_riskprobe");
    let config = fixture("commonsense");
    let run = |args: &[&str]| {
        Command::new(exe)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir.path())
            .args(args)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap()
    };
    let ok = run(&["run"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    fs::remove_file(dir.path().join("labels.jsonl")).unwrap();
    let failed = run(&["run", "--from", "fit"]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("fit stage failed"));
}
