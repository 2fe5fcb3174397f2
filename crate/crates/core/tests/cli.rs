use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curveflow::io::{load_scheme, read_document, to_document, topology_document, write_json};
use curveflow::{flow_rhs, generators, WeightingScheme};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curveflow"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn save_scheme(dir: &Path, name: &str, s: &WeightingScheme) -> PathBuf {
    let p = dir.join(name);
    write_json(&to_document(s), std::fs::File::create(&p).unwrap()).unwrap();
    p
}

fn save_topology(dir: &Path, name: &str, g: &curveflow::MixedGraph) -> PathBuf {
    let p = dir.join(name);
    write_json(&topology_document(g), std::fs::File::create(&p).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curvature_of_k3() {
    let dir = TempDir::new().unwrap();
    let k3 = save_scheme(dir.path(), "k3.json", &generators::k3_srw());
    let out = run(&["curvature", s(&k3)]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["dimension"], "inf");
    let vs = doc["vertices"].as_array().unwrap();
    assert_eq!(vs.len(), 3);
    for v in vs {
        assert_eq!(v["k"].as_f64().unwrap(), 1.25);
        assert_eq!(v["k_dist"].as_f64().unwrap(), 1.25);
        assert_eq!(v["sharp"], true);
    }

    let one = run(&["curvature", s(&k3), "--vertex", "v1", "--dimension", "2"]);
    let doc: Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 1);
    assert_eq!(doc["vertices"][0]["k"].as_f64().unwrap(), 0.25);

    let text = run(&["curvature", s(&k3), "--text"]);
    assert_eq!(text.status.code(), Some(0));
    let table = stdout(&text);
    assert_eq!(table.lines().count(), 4);
    assert!(table.contains("1.250000000000"));

    assert_eq!(run(&["curvature", s(&k3), "--vertex", "nope"]).status.code(), Some(1));
}

#[test]
fn sharpness_json_and_text() {
    let dir = TempDir::new().unwrap();
    let k3 = save_scheme(dir.path(), "k3.json", &generators::k3_srw());
    let out = run(&["sharpness", s(&k3), "--dimension", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    for e in doc.as_array().unwrap() {
        assert_eq!(e["isolated"], false);
        assert_eq!(e["sharp_via_q"], true);
        assert_eq!(e["n_sharp"], true);
    }
    let sq = save_scheme(dir.path(), "sq.json", &generators::square(0.3));
    let doc: Value = serde_json::from_str(&stdout(&run(&["sharpness", s(&sq)]))).unwrap();
    assert_eq!(doc[0]["sharp_via_q"], false);
    assert!(stdout(&run(&["sharpness", s(&sq), "--text"])).lines().count() == 5);
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"vertices\": [\"a\"").unwrap();
    assert_eq!(run(&["curvature", s(&bad)]).status.code(), Some(1));
    // Rows that do not sum to one.
    std::fs::write(
        &bad,
        r#"{"vertices":["a","b"],"two_sided_edges":[["a","b"]],"rates":[{"from":"a","to":"b","p":0.4},{"from":"b","to":"a","p":1.0}]}"#,
    )
    .unwrap();
    let out = run(&["curvature", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["curvature", "/does/not/exist.json"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn flow_outputs_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let start = generators::square(0.3);
    let sq = save_scheme(dir.path(), "sq.json", &start);
    let csv_path = dir.path().join("traj.csv");
    let fin = dir.path().join("final.json");
    let out = run(&[
        "flow", s(&sq), "--t-max", "100", "--record-every", "10", "--out", s(&csv_path), "--final", s(&fin),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["limit_sharp"], true);

    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let head: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&head[..4], ["t", "rhs_inf_norm", "row_sum_defect", "min_rate"]);
    assert_eq!(head.len(), 4 + 8);
    assert!(head.contains(&"p_v0_v1".to_owned()));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r.len() == head.len()));
    assert_eq!(&rows[0][0], "0");

    // The final scheme reloads to the same flow field.
    let back = load_scheme(&fin).unwrap();
    assert_eq!(back.graph(), start.graph());
    let reread = read_document(&fin).unwrap();
    let again = reread.scheme().unwrap();
    assert!((flow_rhs(&back) - flow_rhs(&again)).amax() <= 1e-15);
    assert!(flow_rhs(&back).amax() < 1e-7);

    // Non-convergence is not an error.
    let short = run(&["flow", s(&sq), "--t-max", "0.05"]);
    assert_eq!(short.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&stdout(&short)).unwrap();
    assert_eq!(summary["converged"], false);
    assert!(summary["limit_sharp"].is_null());

    // A step far too large drives rates negative.
    let k5 = save_topology(dir.path(), "k5.json", &generators::complete_graph(5));
    let srw = dir.path().join("k5srw.json");
    let made = run(&["construct", "--kind", "srw", "--graph", s(&k5), "--out", s(&srw)]);
    assert_eq!(made.status.code(), Some(0));
    let skew = {
        let (g, mut p) = load_scheme(&srw).unwrap().into_parts();
        p[(0, 1)] = 0.97;
        for y in 2..5 {
            p[(0, y)] = 0.01;
        }
        save_scheme(dir.path(), "skew.json", &WeightingScheme::new(g, p).unwrap())
    };
    assert_eq!(run(&["flow", s(&skew), "--dt", "50", "--t-max", "100"]).status.code(), Some(3));
    assert_eq!(run(&["flow", s(&sq), "--dt", "0", "--t-max", "1"]).status.code(), Some(1));
}

#[test]
fn sweeps() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("sq.csv");
    let out = run(&["sweep", "--family", "square", "--grid", "0:1:0.25", "--out", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["p", "K_inf", "K_inf_dist"]);
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2], vec![0.5, 1.0, 1.0]);
    assert_eq!(rows[4], vec![1.0, 2.0, 2.0]);

    let p3 = stdout(&run(&["sweep", "--family", "path3", "--grid", "0.5:0.5:0.1"]));
    let line = p3.lines().nth(1).unwrap();
    let k: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - (1.0 - 0.5f64.sqrt())).abs() < 1e-11);

    assert_eq!(run(&["sweep", "--family", "square", "--grid", "1:0:0.1"]).status.code(), Some(1));
}

#[test]
fn constructions() {
    let dir = TempDir::new().unwrap();
    let cat = run(&["construct", "--kind", "k3-catalog"]);
    assert_eq!(cat.status.code(), Some(0));
    let docs: Vec<curveflow::io::GraphDocument> = serde_json::from_str(&stdout(&cat)).unwrap();
    assert_eq!(docs.len(), 4);
    for d in &docs {
        assert!(flow_rhs(&d.scheme().unwrap()).amax() < 1e-12);
    }

    let p4 = save_topology(dir.path(), "p4.json", &generators::path_graph(4));
    let out = run(&["construct", "--kind", "clique", "--graph", s(&p4), "--clique", "v1,v2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: curveflow::io::GraphDocument = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc.scheme().unwrap().rate(1, 2), 1.0);
    assert_eq!(
        run(&["construct", "--kind", "clique", "--graph", s(&p4), "--clique", "v0,v2"]).status.code(),
        Some(1)
    );

    let q3 = save_topology(dir.path(), "q3.json", &generators::hypercube(3));
    assert_eq!(run(&["construct", "--kind", "triangle-free", "--graph", s(&q3)]).status.code(), Some(0));
    let bad = save_topology(
        dir.path(),
        "bad.json",
        &curveflow::MixedGraph::unmixed(4, &[(0, 2), (1, 2), (1, 3)]).unwrap(),
    );
    let out = run(&["construct", "--kind", "triangle-free", "--graph", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no solution"));
    let k3 = save_topology(dir.path(), "k3.json", &generators::complete_graph(3));
    assert_eq!(run(&["construct", "--kind", "triangle-free", "--graph", s(&k3)]).status.code(), Some(1));
    assert_eq!(run(&["construct", "--kind", "srw"]).status.code(), Some(1));
}

#[test]
fn flow_batch_over_a_directory() {
    let dir = TempDir::new().unwrap();
    save_topology(dir.path(), "k3.json", &generators::complete_graph(3));
    save_topology(dir.path(), "c4.json", &generators::cycle_graph(4));
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let out_path = dir.path().join("batch.csv");
    let out = run(&[
        "flow-batch", "--graphs", s(dir.path()), "--seeds", "2", "--t-max", "200", "--out", s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&out_path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["graph", "seed", "converged", "time", "final_min_rate", "limit_sharp", "limit_degenerate"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!((&rows[0][0], &rows[0][1]), ("c4", "0"));
    assert_eq!((&rows[3][0], &rows[3][1]), ("k3", "1"));
    for r in rows.iter().filter(|r| &r[0] == "k3") {
        assert_eq!((&r[2], &r[5], &r[6]), ("true", "true", "false"));
    }
}
