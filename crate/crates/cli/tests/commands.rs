use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use riskprobe::report::ReportBundle;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn riskprobe(out: &Path, args: &[&str]) -> Output {
    let o = Command::new(env!("CARGO_BIN_EXE_riskprobe")).arg("--out").arg(out).args(args).env("RUST_LOG", "warn").output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn commonsense_steps_match_the_configured_run() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path();
    let fx = fixtures().join("commonsense");
    let corpus = fx.join("corpus.wikitext");
    let corpus = corpus.to_str().unwrap();
    let p = |name: &str| o.join(name).to_string_lossy().into_owned();

    riskprobe(o, &["corpus-stats", "--corpus", corpus, "count"]);
    riskprobe(o, &["--seed", "7", "sample-terms", "--corpus", corpus]);
    assert_eq!(lines(&o.join("instances.jsonl")), 200);
    riskprobe(o, &["query", "--instances", &p("instances.jsonl"), "--model", "mock-gpt"]);
    assert_eq!(lines(&o.join("responses.jsonl")), 200);
    let ann = fx.join("annotations.jsonl");
    riskprobe(o, &["ingest-annotations", "--task", "commonsense_qa", "--annotations", ann.to_str().unwrap()]);
    riskprobe(o, &["fit", "--task", "commonsense_qa", "--labels", &p("labels.jsonl"), "--factors", &p("factors.csv")]);
    let shown = riskprobe(
        o,
        &["report", "--task", "commonsense_qa", "--fits", &p("fits.json"), "--labels", &p("labels.jsonl"), "--factors", &p("factors.csv")],
    );
    assert!(String::from_utf8_lossy(&shown.stdout).contains("19.5% (39/200)"));

    let configured = tempfile::tempdir().unwrap();
    riskprobe(configured.path(), &["--config", fx.join("run.json").to_str().unwrap(), "run"]);
    let a = ReportBundle::read(&o.join("report")).unwrap();
    let b = ReportBundle::read(&configured.path().join("report")).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.rates, b.rates);
}

#[test]
fn nlsat_generation_and_fewshot_prompts() {
    let out = tempfile::tempdir().unwrap();
    riskprobe(out.path(), &["--seed", "4", "gen-nlsat", "--count", "20", "--fewshot-n", "0,2"]);
    assert_eq!(lines(&out.path().join("theories.jsonl")), 20);
    assert_eq!(lines(&out.path().join("instances.jsonl")), 40);
    let factors = fs::read_to_string(out.path().join("factors.csv")).unwrap();
    assert!(factors.lines().next().unwrap().contains("fewshot_n"));
}

#[test]
fn cnli_scoring_and_rendering() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path();
    let fx = fixtures().join("cnli");
    let f = |n: &str| fx.join(n).to_string_lossy().into_owned();
    riskprobe(o, &["build-cnli", "--chains", &f("chains.jsonl"), "--pairs", &f("pairs.jsonl"), "--scores", &f("scores.jsonl"), "score"]);
    assert_eq!(lines(&o.join("cnli_instances.jsonl")), 40);
    let inst = o.join("cnli_instances.jsonl");
    riskprobe(o, &["build-cnli", "--instances", inst.to_str().unwrap(), "render"]);
    assert_eq!(lines(&o.join("instances.jsonl")), 40);
}

#[test]
fn missing_scores_without_a_scorer_fails() {
    let out = tempfile::tempdir().unwrap();
    let fx = fixtures().join("cnli");
    let o = Command::new(env!("CARGO_BIN_EXE_riskprobe"))
        .arg("--out")
        .arg(out.path())
        .args(["build-cnli", "--chains"])
        .arg(fx.join("chains.jsonl"))
        .arg("--pairs")
        .arg(fx.join("pairs.jsonl"))
        .arg("score")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
