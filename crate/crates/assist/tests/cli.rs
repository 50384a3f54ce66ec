mod support;

use std::process::Command;

use support::common::context_corpus;
use support::fixture;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparql-assist"));
    cmd.env_remove(sparql_assist::config::CONFIG_ENV);
    cmd
}

fn write_query(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("query.rq");
    std::fs::write(&path, text).unwrap();
    path
}

fn suggest(args: &[&str]) -> (i32, serde_json::Value, String) {
    let out = bin().arg("suggest").args(args).arg("--offline").output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), json, stderr)
}

#[test]
fn corpus_entries_report_the_golden_position() {
    let dir = tempfile::tempdir().unwrap();
    for entry in context_corpus().iter().take(12) {
        let path = write_query(&dir, &entry.text);
        let cursor = entry.cursor().to_string();
        let (code, json, stderr) = suggest(&[path.to_str().unwrap(), &cursor]);
        assert_eq!(code, 0, "{stderr}");
        assert_eq!(json["context"]["position"], entry.position.as_str(), "{:?}", entry.text);
    }
}

#[test]
fn limit_flag_bounds_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_query(&dir, "");
    let (code, json, _) = suggest(&[path.to_str().unwrap(), "0", "--limit", "1"]);
    assert_eq!(code, 0);
    assert!(json["suggestions"].as_array().unwrap().len() <= 1);
}

#[test]
fn empty_query_offers_select() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_query(&dir, "");
    let (code, json, _) = suggest(&[path.to_str().unwrap(), "0"]);
    assert_eq!(code, 0);
    let inserted: Vec<&str> = json["suggestions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["insert_text"].as_str().unwrap())
        .collect();
    assert!(inserted.contains(&"SELECT"), "{inserted:?}");
}

#[test]
fn ontology_flag_feeds_the_engine() {
    let dir = tempfile::tempdir().unwrap();
    let text = "PREFIX sio: <http://semanticscience.org/resource/> SELECT ?x WHERE { ?x sio:";
    let path = write_query(&dir, text);
    let cursor = text.len().to_string();
    let (code, json, _) = suggest(&[path.to_str().unwrap(), &cursor, "--ontology", fixture("sio.ttl").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json["suggestions"].as_array().unwrap().len(), 3);
}

#[test]
fn no_suggestions_is_still_success() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_query(&dir, "SELECT * WHERE { ?x ?p \"open");
    let (code, json, _) = suggest(&[path.to_str().unwrap(), "27"]);
    assert_eq!(code, 0);
    assert_eq!(json["suggestions"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_query(&dir, "SELECT");
    assert_eq!(bin().args(["suggest", "--bogus"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["suggest", path.to_str().unwrap(), "x"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["suggest", path.to_str().unwrap(), "99"]).output().unwrap().status.code(), Some(2));
    let missing = dir.path().join("missing.rq");
    assert_eq!(bin().args(["suggest", missing.to_str().unwrap(), "0"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"listen_port": 70000}"#).unwrap();
    let out = bin().args(["index"]).env(sparql_assist::config::CONFIG_ENV, &cfg).output().unwrap();
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("listen_port"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    let onto = fixture("sio.ttl");
    std::fs::write(&cfg, serde_json::json!({ "ontologies": [onto], "languages": ["de"] }).to_string()).unwrap();
    let out = bin()
        .args(["index", "--config", cfg.to_str().unwrap(), "--ontology", fixture("bilingual.ttl").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let first = stdout.lines().next().unwrap();
    assert!(first.starts_with("terms\t"));
    assert!(stdout.contains("http://semanticscience.org/resource/SIO_000253"));
    assert!(stdout.contains("http://example.org/bi/Colour"));
}

#[test]
fn index_dump_is_deterministic() {
    let run = || {
        bin()
            .args(["index", "--ontology", fixture("bilingual.ttl").to_str().unwrap()])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}
