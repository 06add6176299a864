use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn nonrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonrep"))
        .args(args)
        .output()
        .unwrap()
}

fn nonrep_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nonrep"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_reports_square_witness() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.txt");
    fs::write(&f, "1 2 3 1 3 1 2\n").unwrap();
    let out = nonrep(&["verify", "--k", "1", "--input", p(&f)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "3 1 2");
}

#[test]
fn verify_passes_square_free_word() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.txt");
    fs::write(&f, "1 2 3 1 3 2 1 2 3\n").unwrap();
    let out = nonrep(&["verify", "--k", "1", "--input", p(&f)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "PASS");
}

#[test]
fn verify_json_and_labels() {
    let out = nonrep_stdin(&["--json", "verify", "--diffs", "2"], b"x y x y\n");
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["witness"]["d"], 2);

    let out = nonrep_stdin(&["verify", "--k", "1"], b"a b c a c b a b c");
    assert_eq!(code(&out), 0);
}

#[test]
fn generate_pipes_into_verify() {
    let gen = nonrep(&["generate", "--n", "100", "--k", "2", "--seed", "7"]);
    assert_eq!(code(&gen), 0);
    assert_eq!(stdout(&gen).split_whitespace().count(), 100);
    let ver = nonrep_stdin(&["verify", "--k", "2"], &gen.stdout);
    assert_eq!(code(&ver), 0, "{}", stdout(&ver));

    let again = nonrep(&["generate", "--n", "100", "--k", "2", "--seed", "7"]);
    assert_eq!(gen.stdout, again.stdout);
}

#[test]
fn generate_with_explicit_lists() {
    let dir = tempfile::tempdir().unwrap();
    let lists = dir.path().join("lists.json");
    let rows: Vec<Vec<u32>> = (0..30)
        .map(|i| (1..=4).map(|s| s + 10 * (i % 3)).collect())
        .collect();
    fs::write(&lists, serde_json::to_string(&rows).unwrap()).unwrap();
    let out = nonrep(&[
        "--json",
        "generate",
        "--n",
        "30",
        "--k",
        "1",
        "--lists",
        p(&lists),
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let seq = v["sequence"].as_array().unwrap();
    for (i, s) in seq.iter().enumerate() {
        assert!(rows[i].contains(&(s.as_u64().unwrap() as u32)));
    }
}

#[test]
fn generate_rejects_short_lists() {
    let out = nonrep(&[
        "generate",
        "--n",
        "10",
        "--k",
        "2",
        "--list-size",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn generate_budget_exhaustion_exits_one() {
    let out = nonrep(&[
        "generate",
        "--n",
        "200",
        "--k",
        "1",
        "--list-size",
        "3",
        "--seed",
        "1",
        "--max-choices",
        "5",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn log_encode_decode_recovers_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let config = dir.path().join("config.json");
    let log = dir.path().join("log.json");
    let gen = nonrep(&[
        "generate",
        "--n",
        "150",
        "--k",
        "1",
        "--list-size",
        "4",
        "--seed",
        "11",
        "--trace",
        p(&trace),
        "--config-out",
        p(&config),
    ]);
    assert_eq!(code(&gen), 0);

    let enc = nonrep(&["log", "encode", "--trace", p(&trace), "--out", p(&log)]);
    assert_eq!(code(&enc), 0);
    let dec = nonrep(&[
        "--json",
        "log",
        "decode",
        "--log",
        p(&log),
        "--config",
        p(&config),
    ]);
    assert_eq!(code(&dec), 0);
    let ranks: Vec<u64> = serde_json::from_str::<Value>(&stdout(&dec)).unwrap()["ranks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_u64().unwrap())
        .collect();

    let expected: Vec<u64> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .skip(1)
        .filter_map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            v.get("chosen_rank").and_then(Value::as_u64)
        })
        .collect();
    assert!(expected.len() > 150);
    assert_eq!(ranks, expected);
}

#[test]
fn log_decode_rejects_tampered_log() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let config = dir.path().join("config.json");
    let log = dir.path().join("log.json");
    nonrep(&[
        "generate",
        "--n",
        "60",
        "--k",
        "1",
        "--list-size",
        "3",
        "--seed",
        "5",
        "--trace",
        p(&trace),
        "--config-out",
        p(&config),
    ]);
    nonrep(&["log", "encode", "--trace", p(&trace), "--out", p(&log)]);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    v["S"][0] = Value::from(99);
    fs::write(&log, v.to_string()).unwrap();
    let dec = nonrep(&["log", "decode", "--log", p(&log), "--config", p(&config)]);
    assert_eq!(code(&dec), 1);
}

#[test]
fn log_bound_prints_crossing() {
    let out = nonrep(&["log", "bound", "--n", "1000", "--k", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "15038");
    let explicit = nonrep(&["log", "bound", "--n", "1000", "--k", "1", "--q", "12"]);
    assert_eq!(stdout(&explicit), stdout(&out));
}

#[test]
fn search_reports_longest_word() {
    let out = nonrep(&["search", "--q", "2", "--k", "1", "--cap", "20"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["max_length"], 3);
    assert_eq!(v["witness"], serde_json::json!([1, 2, 1]));
    assert_eq!(v["exhausted"], true);
}

#[test]
fn search_budget_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let args = |budget: &'static str| {
        vec![
            "search",
            "--q",
            "3",
            "--k",
            "1",
            "--cap",
            "200",
            "--budget",
            budget,
            "--resume",
            p(&ck),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| {
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        nonrep(&refs)
    };
    let first = run(args("100"));
    assert_eq!(code(&first), 1);
    assert!(ck.exists());
    let second = run(args("100000000"));
    assert_eq!(code(&second), 0);
    let resumed: Value = serde_json::from_str(&stdout(&second)).unwrap();
    let direct: Value = serde_json::from_str(&stdout(&nonrep(&[
        "search", "--q", "3", "--k", "1", "--cap", "200",
    ])))
    .unwrap();
    assert_eq!(resumed, direct);

    let mismatch = nonrep(&[
        "search",
        "--q",
        "4",
        "--k",
        "1",
        "--cap",
        "200",
        "--resume",
        p(&ck),
    ]);
    assert_eq!(code(&mismatch), 2);
}

#[test]
fn geom_color_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.json");
    let coloring = dir.path().join("coloring.txt");
    let mut lines = Vec::new();
    for r in 0..6 {
        lines.push((0..6).map(|c| r * 6 + c + 1).collect::<Vec<_>>());
    }
    for c in 0..6 {
        lines.push((0..6).map(|r| r * 6 + c + 1).collect::<Vec<_>>());
    }
    fs::write(
        &config,
        serde_json::json!({ "points": 36, "lines": lines }).to_string(),
    )
    .unwrap();

    let col = nonrep(&[
        "geom",
        "color",
        "--config",
        p(&config),
        "--colors",
        "19",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&col), 0);
    fs::write(&coloring, &col.stdout).unwrap();
    let ver = nonrep(&[
        "geom",
        "verify",
        "--config",
        p(&config),
        "--coloring",
        p(&coloring),
    ]);
    assert_eq!(code(&ver), 0);
    assert_eq!(stdout(&ver).trim(), "PASS");

    fs::write(&coloring, "1 2 1 2 3 4 ".repeat(6)).unwrap();
    let bad = nonrep(&[
        "--json",
        "geom",
        "verify",
        "--config",
        p(&config),
        "--coloring",
        p(&coloring),
    ]);
    assert_eq!(code(&bad), 1);
    let v: Value = serde_json::from_str(&stdout(&bad)).unwrap();
    assert_eq!(v["nonrepetitive"], false);

    let few = nonrep(&[
        "geom",
        "color",
        "--config",
        p(&config),
        "--colors",
        "4",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&few), 2);
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("report");
    let out = nonrep(&[
        "bench",
        "--n",
        "40",
        "--k",
        "1",
        "--q",
        "4",
        "--trials",
        "8",
        "--seed",
        "2",
        "--out",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"], 8);
    assert_eq!(v["success_rate"], 1.0);
    let csv = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&nonrep(&["bogus"])), 2);
    let out = nonrep(&["bogus"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&nonrep(&["generate", "--n", "10", "--k", "1"])), 2);
    assert_eq!(code(&nonrep(&["verify", "--k", "1", "--diffs", "1"])), 2);
    assert_eq!(
        code(&nonrep(&[
            "verify",
            "--k",
            "1",
            "--input",
            "/nonexistent/file"
        ])),
        2
    );
}
