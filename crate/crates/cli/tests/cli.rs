use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_taxel-bow"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A small easy dataset: `subjects` subjects, every label, one object and pose.
fn small_dataset(dir: &TempDir, subjects: usize, runs: usize) -> PathBuf {
    let cfg = dir.path().join(format!("gen-{subjects}-{runs}.txt"));
    fs::write(
        &cfg,
        format!("preset = easy\nsubjects = {subjects}\nruns_per_subject = {runs}\nobjects = ball\nposes = horizontal\n"),
    )
    .unwrap();
    let out = dir.path().join(format!("data-{subjects}-{runs}.jsonl"));
    let o = run(&["generate", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn generate_paper_shape_has_900_samples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.jsonl");
    let o = run(&["generate", "--preset", "paper-shape", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(lines, 1 + 900);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = small_dataset(&dir, 1, 1);
    let b = dir.path().join("again.jsonl");
    let cfg = dir.path().join("gen-1-1.txt");
    let o = run(&["generate", "--config", p(&cfg), "--out", p(&b)]);
    assert!(o.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c = dir.path().join("other.jsonl");
    let o = run(&["--seed", "99", "generate", "--config", p(&cfg), "--out", p(&c)]);
    assert!(o.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["generate", "--preset", "easy"]);
    assert_eq!(o.status.code(), Some(2), "missing --out");
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir, 1, 1);
    let model = dir.path().join("m.json");
    let o = run(&["train", "--data", p(&data), "--out", p(&model), "--w", "15"]);
    assert_eq!(o.status.code(), Some(2), "W > T - 1: {}", stderr(&o));
    let o = run(&["sweep", "--data", p(&data), "--param", "q"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_documents_defaults() {
    let o = run(&["train", "--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in ["[default: 10]", "[default: 7]", "[default: 15]", "[default: 0.15]", "[default: all-pads]"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn train_classify_and_bad_data() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir, 2, 2);
    let model = dir.path().join("m.json");
    let o = run(&["train", "--data", p(&data), "--out", p(&model), "--k", "3", "--w", "7", "--t", "15"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["codebook"]["K"], 3);
    assert_eq!(json["config"]["T"], 15);

    // defaults separate the easy preset perfectly
    let o = run(&["train", "--data", p(&data), "--out", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("train accuracy 1.0000"), "{}", stdout(&o));

    let o = run(&["classify", "--model", p(&model), "--input", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 16);

    // a corrupt line is reported with its line number
    let text = fs::read_to_string(&data).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[3] = "{not json";
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, lines.join("\n")).unwrap();
    let o = run(&["train", "--data", p(&bad), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    // a single-label dataset cannot train a classifier
    let single: Vec<&str> = text.lines().take(3).collect();
    let one = dir.path().join("one.jsonl");
    fs::write(&one, single.join("\n")).unwrap();
    let o = run(&["train", "--data", p(&one), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn evaluate_loso_and_pooled() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir, 5, 1);
    let out = dir.path().join("loso");
    let o = run(&["evaluate", "--data", p(&data), "--split", "loso", "--out-dir", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("held out")).count(), 5);
    assert!(text.contains("pooled over folds"));
    let confusion = fs::read_to_string(out.join("confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 5);

    let data = small_dataset(&dir, 2, 3);
    let out = dir.path().join("pooled");
    let o = run(&["evaluate", "--data", p(&data), "--out-dir", p(&out), "--k", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let projection = fs::read_to_string(out.join("projection.csv")).unwrap();
    assert_eq!(projection.lines().next(), Some("x,y,label,sample_id"));
    assert_eq!(projection.lines().count(), 1 + 24);

    let o = run(&["evaluate", "--data", p(&data), "--features", "handcrafted"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir, 2, 3);
    let o = run(&[
        "sweep",
        "--data",
        p(&data),
        "--param",
        "k",
        "--values",
        "2,5,10,20",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep_k.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,accuracy,skipped");
    assert_eq!(lines.len(), 5);

    // W = T cannot form windows: recorded as an empty accuracy
    let o = run(&["sweep", "--data", p(&data), "--param", "w", "--values", "7,15", "--out-dir", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep_w.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("15,,"), "{csv}");
}

fn stream(model: &Path, input: &str) -> Output {
    let mut child = bin()
        .args(["stream", "--model", p(model)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn stream_emits_events_as_they_fire() {
    let dir = TempDir::new().unwrap();
    let data = small_dataset(&dir, 1, 2);
    let model = dir.path().join("m.json");
    let o = run(&["train", "--data", p(&data), "--out", p(&model), "--k", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let zero = format!("[{}]\n", vec!["0"; 234].join(","));
    let o = stream(&model, &zero.repeat(50));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());

    // replay the frames of the first recording
    let text = fs::read_to_string(&data).unwrap();
    let sample: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    let frames: String = sample["frames"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| format!("{f}\n"))
        .collect();
    let o = stream(&model, &frames);
    assert!(o.status.success(), "{}", stderr(&o));
    let events: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0]["label"], sample["label"]);
    assert_eq!(events[0]["emitted_at"].as_u64().unwrap(), events[0]["onset"].as_u64().unwrap() + 14);

    // a frame of the wrong width is a data error
    let o = stream(&model, "[1,2,3]\n");
    assert_eq!(o.status.code(), Some(3));

    // classify accepts the same frame-per-line encoding
    let file = dir.path().join("frames.jsonl");
    fs::write(&file, &frames).unwrap();
    let o = run(&["classify", "--model", p(&model), "--input", p(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with(&format!("input\t{}", sample["label"].as_str().unwrap())));
}
