mod common;

use std::path::Path;
use std::process::{Command, Output};

use tutorbots_core::analytics::Page;
use tutorbots_core::Condition;

fn tutorbots(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tutorbots"))
        .args(args)
        .env_remove("TUTORBOTS_CONFIG")
        .env("TUTORBOTS_DATA_DIR", data_dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn testdata(name: &str) -> String {
    format!("{}/../../testdata/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn eval_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = tutorbots(
        dir.path(),
        &[
            "eval",
            &testdata("eval_fixture.jsonl"),
            "--rubric",
            &testdata("eval_rubric.jsonl"),
            "--strict",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    stdout(&o);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pairs"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(out.join("levels.csv")).unwrap().lines().count(), 3);
    assert_eq!(std::fs::read_to_string(out.join("pairs.csv")).unwrap().lines().count(), 4);
}

#[test]
fn eval_reports_skipped_lines_unless_strict() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let good = std::fs::read_to_string(testdata("eval_fixture.jsonl")).unwrap();
    std::fs::write(&data, format!("{good}not json\n")).unwrap();
    let o = tutorbots(dir.path(), &["eval", data.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["skipped"][0]["line"], 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped dataset line 4"));

    let o = tutorbots(dir.path(), &["eval", data.to_str().unwrap(), "--strict"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: dataset line 4"));
}

#[tokio::test]
async fn replay_check_and_sequence_export_over_a_live_log() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = common::open_store(dir.path(), Condition::MultiRole);
        let s = store.create_session(None, None).unwrap();
        store.record_click(s.id(), Page::Homepage).await.unwrap();
        store.post_message(s.id(), "How do loops work?").await.unwrap();
    }
    let o = tutorbots(dir.path(), &["replay-check"]);
    assert_eq!(stdout(&o), "ok: 5 records, 1 sessions, 2 messages, 1 page clicks\n");

    let matrix = dir.path().join("m.json");
    let o = tutorbots(dir.path(), &["analyze-sequences", "--matrix", matrix.to_str().unwrap()]);
    let csv = stdout(&o);
    assert_eq!(csv.lines().skip(2).collect::<Vec<_>>(), ["0,0,0", "0,1,4"]);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(matrix).unwrap()).unwrap();
    assert_eq!(m["counts"][0][4], 1);
    assert_eq!(m["counts"][4][4], 0);

    let o = tutorbots(dir.path(), &["analyze-topics", "-k", "1", "--iterations", "10", "--top", "2"]);
    let topics: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(topics["documents"], 1);
}

#[test]
fn replay_check_rejects_a_corrupted_log() {
    let dir = tempfile::tempdir().unwrap();
    let o = tutorbots(dir.path(), &["replay-check"]);
    assert!(!o.status.success(), "a missing log is an error");

    let input = dir.path().join("t.jsonl");
    std::fs::write(
        &input,
        r#"{"pseudonym":"h-001","condition":"single_bot","messages":[{"author":"student","text":"call 555-123-4567","timestamp":1},{"author":"instructor","text":"Done.","timestamp":2}]}"#,
    )
    .unwrap();
    let o = tutorbots(dir.path(), &["import-transcripts", input.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("appended 3 records"));
    let log = dir.path().join("events.jsonl");
    let raw = std::fs::read_to_string(&log).unwrap();
    assert!(raw.contains("call [PHONE]") && !raw.contains("555"));
    assert_eq!(
        stdout(&tutorbots(dir.path(), &["replay-check"])),
        "ok: 3 records, 1 sessions, 2 messages, 0 page clicks\n"
    );

    let kept: Vec<&str> = raw.lines().enumerate().filter(|(i, _)| *i != 1).map(|(_, l)| l).collect();
    std::fs::write(&log, kept.join("\n") + "\n").unwrap();
    let o = tutorbots(dir.path(), &["replay-check"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("error:") && err.contains('2') && err.contains('3'), "{err}");
}
