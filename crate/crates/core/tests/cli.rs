use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const T1: &str = "(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1.0);";
const T2: &str = "(((2:0.2,3:0.2):0.2,1:0.4):0.6,4:1.0);";

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Files { dir: tempfile::tempdir().unwrap() }
    }

    fn add(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn troptree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_troptree")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn segment_csv_rows() {
    let f = Files::new();
    let (a, b) = (f.add("t1.nwk", T1), f.add("t2.nwk", T2));
    let o = troptree(&["segment", s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.len(), 4 + 6);
    assert_eq!(&header[2], "u_1_2");
    assert_eq!(&header[9], "topology");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let entries = |r: &csv::StringRecord| (2..8).map(|i| r[i].parse::<f64>().unwrap()).collect::<Vec<_>>();
    assert_eq!(entries(&rows[0]), [0.8, 0.8, 2.0, 0.4, 2.0, 2.0]);
    assert_eq!(entries(&rows[1]), [0.8, 0.8, 2.0, 0.8, 2.0, 2.0]);
    assert_eq!(entries(&rows[2]), [0.4, 0.8, 2.0, 0.8, 2.0, 2.0]);
    assert_eq!(&rows[1][8], "((1:0.4,2:0.4,3:0.4):0.6,4:1);");
    assert_eq!(&rows[1][9], "{1,2,3} {1,2,3,4}");
}

#[test]
fn segment_other_formats() {
    let f = Files::new();
    let (a, b) = (f.add("t1.nwk", T1), f.add("t2.nwk", T2));
    let o = troptree(&["segment", s(&a), s(&b), "--format", "newick"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[2], "(((1:0.2,2:0.2):0.2,3:0.4):0.6,4:1);");

    let o = troptree(&["segment", s(&a), s(&b), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["bends"].as_array().unwrap().len(), 3);
    assert_eq!(doc["topologies"][1], "{1,2,3} {1,2,3,4}");
    assert!((doc["distance"].as_f64().unwrap() - 0.8).abs() < 1e-12);
}

#[test]
fn identical_inputs_give_one_row() {
    let f = Files::new();
    let a = f.add("t1.nwk", T1);
    let o = troptree(&["segment", s(&a), s(&a)]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = troptree(&["topologies", s(&a), s(&a)]);
    assert_eq!(stdout(&o), "{1,2} {1,2,3} {1,2,3,4}\nstar-crossing: no\n");
    let o = troptree(&["dist", s(&a), s(&a)]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn malformed_input_reports_offset() {
    let f = Files::new();
    let a = f.add("t1.nwk", T1);
    let bad = f.add("bad.nwk", "(((1:0.2,2:0.2):0.2,3):0.6,4:1.0);");
    let o = troptree(&["segment", s(&a), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("byte 21"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn not_equidistant_and_mismatch() {
    let f = Files::new();
    let a = f.add("t1.nwk", T1);
    let lopsided = f.add("lop.nwk", "(1:1,(2:0.5,3:0.5):0.2);");
    let o = troptree(&["validate", s(&lopsided)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("leaf '1'"), "{}", stderr(&o));
    let o = troptree(&["segment", s(&a), s(&lopsided)]);
    assert_eq!(o.status.code(), Some(3));
    let other = f.add("other.nwk", "(((1:0.2,2:0.2):0.2,3:0.4):0.6,5:1.0);");
    let o = troptree(&["dist", s(&a), s(&other)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn validate_accepts_examples() {
    let f = Files::new();
    for (name, text) in [("t1", T1), ("star", "(a:2,b:2,c:2,d:2);")] {
        let p = f.add(name, text);
        let o = troptree(&["validate", s(&p)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}

#[test]
fn topologies_and_flags() {
    let f = Files::new();
    let (a, b) = (f.add("t1.nwk", T1), f.add("t2.nwk", T2));
    let o = troptree(&["topologies", s(&a), s(&b)]);
    assert_eq!(
        stdout(&o),
        "{2,3} {1,2,3} {1,2,3,4}\n{1,2,3} {1,2,3,4}\n{1,2} {1,2,3} {1,2,3,4}\nstar-crossing: no\n\
         transition 1: degenerate\ntransition 2: degenerate\n"
    );
    let x = f.add("x.nwk", "((1:0.3,2:0.3):0.7,3:1);");
    let y = f.add("y.nwk", "((2:0.6,3:0.6):0.4,1:1);");
    let o = troptree(&["topologies", s(&x), s(&y)]);
    let text = stdout(&o);
    assert!(text.contains("star-crossing: yes"), "{text}");
    assert!(text.lines().any(|l| l == "{1,2,3}"));
}

#[test]
fn distances() {
    let f = Files::new();
    let (a, b) = (f.add("t1.nwk", T1), f.add("t2.nwk", T2));
    assert_eq!(stdout(&troptree(&["dist", s(&a), s(&b)])), "0.8\n");
    // Ultrametrics (4,4,4) and (1,4,4).
    let star = f.add("star.nwk", "(1:2,2:2,3:2);");
    let cherry = f.add("cherry.nwk", "((1:0.5,2:0.5):1.5,3:2);");
    assert_eq!(stdout(&troptree(&["dist", s(&star), s(&cherry)])), "3\n");
}

#[test]
fn simulate_reports() {
    let o = troptree(&["simulate", "star-prob", "--n", "5", "--samples", "500", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["hits"], 0);
    assert_eq!(doc["config"]["model"], "coalescent");
    assert!(stderr(&o).contains("elapsed"));

    let o = troptree(&["simulate", "star-prob", "--n", "3", "--samples", "3000", "--seed", "42"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rate = doc["rate"].as_f64().unwrap();
    assert!((rate - 2.0 / 3.0).abs() < 0.03, "{rate}");

    let f = Files::new();
    let out = f.dir.path().join("report.json");
    let bad = f.dir.path().join("violations.csv");
    let args = [
        "simulate",
        "nni-conjecture",
        "--n",
        "4",
        "--samples",
        "100",
        "--out",
        out.to_str().unwrap(),
        "--violations",
        bad.to_str().unwrap(),
    ];
    let o = troptree(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let hist: u64 = doc["transition_histogram"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(hist, 100);
    let csv_text = std::fs::read_to_string(&bad).unwrap();
    assert!(csv_text.starts_with("pair,t1,t2,transition"));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "nni-conjecture", "--n", "5", "--samples", "200", "--seed", "8"];
    assert_eq!(troptree(&args).stdout, troptree(&args).stdout);
}

#[test]
fn usage_errors() {
    assert_eq!(troptree(&[]).status.code(), Some(1));
    assert_eq!(troptree(&["simulate", "star-prob", "--n", "2"]).status.code(), Some(1));
    assert_eq!(troptree(&["simulate", "star-prob", "--samples", "0"]).status.code(), Some(1));
    let help = troptree(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("segment"));
}
