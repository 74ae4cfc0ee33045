use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use retrace_core::fixtures::TOY9_TEXT;

fn retrace(data_dir: &Path, args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_retrace"))
        .args(args)
        .env("RETRACE_DATA_DIR", data_dir)
        .env_remove("RETRACE_LLM_API_KEY")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn separate_annotate_stats_layout_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = retrace(d, &["separate"], TOY9_TEXT);
    assert!(out.status.success());
    let stepped: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(stepped["steps"].as_array().unwrap().len(), 9);

    let doc = d.join("toy9.json");
    let out = retrace(d, &["annotate", "--backend", "heuristic", "--out", doc.to_str().unwrap()], TOY9_TEXT);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = retrace(d, &["stats", "--input", doc.to_str().unwrap()], "");
    let stats: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(stats["step_counts"], serde_json::json!([2, 3, 2, 2]));

    let args = ["layout", "--input", doc.to_str().unwrap(), "--view", "timeline", "--width", "900", "--height", "600"];
    let tree: serde_json::Value = serde_json::from_str(&stdout(&retrace(d, &args, ""))).unwrap();
    assert_eq!(tree["nodes"][1]["rect"], serde_json::json!([200.0, 552.0, 300.0, 48.0]));

    let svg = d.join("toy9.svg");
    let out = retrace(
        d,
        &["export", "--input", doc.to_str().unwrap(), "--expand-phase", "1", "--out", svg.to_str().unwrap()],
        "",
    );
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn stored_traces_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = retrace(d, &["annotate", "--store"], TOY9_TEXT);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let id = err.lines().find_map(|l| l.strip_prefix("stored ")).unwrap().trim().to_owned();
    assert!(d.join("traces").join(format!("{id}.json")).exists());
    assert!(retrace(d, &["stats", "--id", &id], "").status.success());
    assert_eq!(retrace(d, &["stats", "--id", &"f".repeat(64)], "").status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // input errors
    assert_eq!(retrace(d, &["separate"], "\n\n").status.code(), Some(2));
    assert_eq!(retrace(d, &["annotate", "--input", "/no/such/file"], "").status.code(), Some(2));
    assert_eq!(retrace(d, &["stats", "--input", "-"], "not json").status.code(), Some(2));
    let doc = d.join("t.json");
    assert!(retrace(d, &["annotate", "--out", doc.to_str().unwrap()], TOY9_TEXT).status.success());
    let bad_state = ["layout", "--input", doc.to_str().unwrap(), "--expand-subphase", "subphase_1"];
    assert_eq!(retrace(d, &bad_state, "").status.code(), Some(2));
    // provider error: no credential
    assert_eq!(retrace(d, &["annotate", "--backend", "llm"], TOY9_TEXT).status.code(), Some(3));
    // validation error: a document whose indices no longer cover its steps
    let text = std::fs::read_to_string(&doc).unwrap().replacen(
        "\"step_indices\": [\n            8\n          ]",
        "\"step_indices\": [\n            7\n          ]",
        1,
    );
    assert_ne!(text, std::fs::read_to_string(&doc).unwrap());
    assert_eq!(retrace(d, &["stats", "--input", "-"], &text).status.code(), Some(4));
}

#[test]
fn single_step_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = retrace(dir.path(), &["annotate"], "One long paragraph with no line breaks at all.");
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("single step"));
}
