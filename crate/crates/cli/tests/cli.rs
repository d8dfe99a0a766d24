use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn verse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verse"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Two triangles joined by the edge 2-3.
fn small_graph(dir: &Path) {
    fs::write(dir.join("g.edges"), "0 1\n1 2\n0 2\n2 3\n3 4\n4 5\n3 5\n").unwrap();
}

fn manifest(path: &Path) -> Value {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    serde_json::from_str(&fs::read_to_string(name).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&verse(dir.path(), &["--help"])), 0);
    assert_eq!(code(&verse(dir.path(), &["--version"])), 0);
    assert_eq!(code(&verse(dir.path(), &["train", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    assert_eq!(code(&verse(dir.path(), &["frobnicate"])), 1);
    let out = verse(dir.path(), &["train", "--input", "g.edges", "--similarity", "simrank:1.5"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let out = verse(dir.path(), &["train", "--input", "g.edges", "--order", "3"]);
    assert_eq!(code(&out), 1);
    let out = verse(dir.path(), &["train", "--input", "g.edges", "--epochs", "0"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(!dir.path().join("g.edges.emb").exists());
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = verse(dir.path(), &["train", "--input", "missing.edges"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.edges"));

    fs::write(dir.path().join("bad.edges"), "0 1\n1 x\n").unwrap();
    let out = verse(dir.path(), &["train", "--input", "bad.edges"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn exact_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = verse(dir.path(), &["gen", "ws", "--nodes", "2100", "--k", "4", "--beta", "0.1", "--output", "big.edges"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = verse(dir.path(), &["oracle", "--graph", "big.edges", "--similarity", "simrank:0.5", "--nodes", "0"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = verse(dir.path(), &["train", "--input", "big.edges", "--full", "--epochs", "1", "--dim", "2"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn train_defaults_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    let out = verse(dir.path(), &["train", "--input", "g.edges", "--epochs", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let emb = dir.path().join("g.edges.emb");
    let bytes = fs::read(&emb).unwrap();
    assert_eq!(&bytes[..4], b"VRSE");
    assert_eq!(bytes.len(), 20 + 6 * 128 * 4);

    let m = manifest(&emb);
    let config = &m["config"];
    assert_eq!(config["dim"], 128);
    assert_eq!(config["negatives"], 3);
    assert_eq!(config["similarity"], "ppr:0.85");
    assert_eq!(config["order"], 1);
    assert_eq!(config["lr"], 0.0025);
    assert_eq!(m["seed"], 0);
    let input = &m["inputs"][0];
    assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(input["bytes"], fs::metadata(dir.path().join("g.edges")).unwrap().len());
}

#[test]
fn text_and_raw_formats() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    for (format, name) in [("text", "g.txt"), ("raw", "g.raw")] {
        let out = verse(
            dir.path(),
            &["train", "--input", "g.edges", "--epochs", "2", "--dim", "3", "--format", format, "--output", name],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let text = fs::read_to_string(dir.path().join("g.txt")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].split_whitespace().count(), 4);
    assert_eq!(fs::metadata(dir.path().join("g.raw")).unwrap().len(), 6 * 3 * 4);

    let out = verse(
        dir.path(),
        &["eval", "reconstruct", "--embedding", "g.txt", "--graph", "g.edges", "--output", "r.txt"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn row_count_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    fs::write(dir.path().join("h.edges"), "0 1\n1 2\n").unwrap();
    assert_eq!(code(&verse(dir.path(), &["train", "--input", "h.edges", "--epochs", "1", "--dim", "4"])), 0);
    let out = verse(dir.path(), &["eval", "reconstruct", "--embedding", "h.edges.emb", "--graph", "g.edges"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("3 rows but the graph has 6 nodes"), "{}", stderr(&out));
}

#[test]
fn oracle_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    let out = verse(dir.path(), &["oracle", "--graph", "g.edges", "--nodes", "0,3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("g.edges.oracle.txt")).unwrap();
    let mut sums = [0.0f64; 6];
    for line in text.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        sums[f[0].parse::<usize>().unwrap()] += f[2].parse::<f64>().unwrap();
    }
    assert!((sums[0] - 1.0).abs() < 1e-4 && (sums[3] - 1.0).abs() < 1e-4, "{sums:?}");
    assert_eq!(sums[1], 0.0);
}

#[test]
fn single_cell_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    let out = verse(
        dir.path(),
        &["sweep", "--graph", "g.edges", "--task", "reconstruct", "--grid", "ppr:0.85", "--dim", "4", "--epochs", "20"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("g.edges.sweep.emb.cells.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "task,metric,value,spec,order,seed");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("reconstruct,precision,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",ppr:0.85,1,0"), "{}", lines[1]);
    let m = manifest(&dir.path().join("g.edges.sweep.emb"));
    assert_eq!(m["config"]["similarity"], "ppr:0.85");
}

#[test]
fn split_then_link_prediction() {
    let dir = tempfile::tempdir().unwrap();
    small_graph(dir.path());
    let out = verse(dir.path(), &["gen", "split", "--input", "g.edges", "--test-fraction", "0.3", "--prefix", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = verse(
        dir.path(),
        &["train", "--input", "s.train.edges", "--num-nodes", "6", "--dim", "4", "--epochs", "50", "--output", "s.emb"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = verse(dir.path(), &["eval", "linkpred", "--embedding", "s.emb", "--split", "s.split.tsv", "--repeats", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("s.emb.linkpred.txt")).unwrap();
    assert!(report.contains("accuracy_mean="), "{report}");
    let csv = fs::read_to_string(dir.path().join("s.emb.linkpred.txt.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("linkpred,accuracy,")).count(), 3);
}
