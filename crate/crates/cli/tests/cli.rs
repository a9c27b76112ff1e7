mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use symdyn_core::complexity::FeatureMatrix;
use symdyn_core::discovery::CausalGraph;
use symdyn_core::graphnet::FusionNetwork;

fn symdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = symdyn(args);
    assert!(
        out.status.success(),
        "symdyn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn gen_discover_fuse_centrality_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--scenario", "linear", "--t", "100", "--seed", "7", "--out", &p(d, "s.csv"), "--truth", &p(d, "truth.json")]);
    let truth: Value = serde_json::from_str(&std::fs::read_to_string(d.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["edges"][0]["src"], "X2");

    ok(&["discover", "--in", &p(d, "s.csv"), "--test", "parcorr", "--seed", "1", "--out", &p(d, "g1.json")]);
    ok(&["discover", "--in", &p(d, "s.csv"), "--method", "var", "--out", &p(d, "g2.json")]);
    let g1 = CausalGraph::load(d.join("g1.json")).unwrap();
    assert!(g1.has_lagged(1, 2, 1));

    ok(&["fuse", "--in", &p(d, "g1.json"), &p(d, "g2.json"), "--out", &p(d, "f.json")]);
    let f = FusionNetwork::load(d.join("f.json")).unwrap();
    assert_eq!(f.group_size, 2);
    assert_eq!(f.lagged_counts[0][1][2], 2);

    ok(&["centrality", "--in", &p(d, "f.json"), "--out", &p(d, "c.csv")]);
    let csv = std::fs::read_to_string(d.join("c.csv")).unwrap();
    assert!(csv.starts_with("node,in_degree,out_degree,degree,closeness,betweenness"));
    assert!(csv.contains("X3,1,0,1,"));

    ok(&["kernel", "--kind", "wl", "--normalize", "--in", &p(d, "g1.json"), &p(d, "g2.json"), "--out", &p(d, "K.csv")]);
    let k = std::fs::read_to_string(d.join("K.csv")).unwrap();
    assert_eq!(k.lines().next().unwrap(), ",g1,g2");
    ok(&["kernel", "--kind", "degree", "--in", &p(d, "g1.json"), &p(d, "f.json"), "--out", &p(d, "Kd.csv")]);
}

#[test]
fn fuse_filters_by_group() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen", "--scenario", "linear", "--out", &p(d, "s.csv")]);
    ok(&["discover", "--in", &p(d, "s.csv"), "--test", "parcorr", "--out", &p(d, "g.json")]);
    // graphs without a diagnosis in their metadata match no group
    let out = symdyn(&["fuse", "--group", "GAD", "--in", &p(d, "g.json"), "--out", &p(d, "f.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(symdyn(&["discover", "--in", &p(d, "missing.csv"), "--out", &p(d, "g.json")]).status.code(), Some(3));
    std::fs::write(d.join("bad.json"), "{\"sed\": 1}").unwrap();
    assert_eq!(symdyn(&["pipeline-a", "--config", &p(d, "bad.json")]).status.code(), Some(2));
    // no input path anywhere
    assert_eq!(symdyn(&["pipeline-b"]).status.code(), Some(2));
    std::fs::write(d.join("const.csv"), "a,b\n1,1\n1,2\n1,3\n1,4\n1,5\n1,6\n1,7\n1,8\n").unwrap();
    assert_eq!(
        symdyn(&["discover", "--in", &p(d, "const.csv"), "--method", "var", "--out", &p(d, "g.json")]).status.code(),
        Some(3)
    );
}

#[test]
fn features_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_dataset(&d.join("data.csv"), 4, 1, 80, 2, 1);
    std::fs::write(
        d.join("grid.json"),
        r#"{"m": [2], "delay": [1], "q": [0.1, 0.2], "r": [0.2]}"#,
    )
    .unwrap();
    ok(&["features", "--in", &p(d, "data.csv"), "--grid", &p(d, "grid.json"), "--out", &p(d, "features.csv")]);
    let fm = FeatureMatrix::load(d.join("features.csv")).unwrap();
    assert_eq!(fm.n_rows(), 9 * 2);
    assert!(fm.column_index("dfa__s0").is_some());

    ok(&[
        "classify", "--features", &p(d, "features.csv"), "--trees", "30", "--seed", "3", "--loocv",
        "--max-rounds", "2", "--out", &p(d, "report.json"),
    ]);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    let r = &rep["report"];
    assert_eq!(r["loocv"]["individuals"].as_array().unwrap().len(), 8);
    assert!(r["roc"]["auc"].as_f64().unwrap() >= 0.0);
    assert_eq!(r["holdout"].as_array().unwrap().len(), 1);
    assert!(!r["selection"]["rounds"].as_array().unwrap().is_empty());

    ok(&[
        "classify", "--features", &p(d, "features.csv"), "--trees", "20", "--no-boruta", "--threshold", "0.6",
        "--out", &p(d, "plain.json"),
    ]);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(d.join("plain.json")).unwrap()).unwrap();
    assert!(rep["report"]["loocv"].is_null());
    assert_eq!(rep["report"]["threshold"], 0.6);
}

#[test]
fn pipelines_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_dataset(&d.join("data.csv"), 3, 1, 60, 3, 2);
    std::fs::write(
        d.join("config.json"),
        r#"{
            "seed": 11,
            "discovery": {"test": "parcorr"},
            "features": {"m": [2], "delay": [1], "q": [0.15], "r": [0.2]},
            "classifier": {"forest": {"n_trees": 20}, "max_rounds": 2}
        }"#,
    )
    .unwrap();
    let out_a = d.join("a");
    ok(&["pipeline-a", "--config", &p(d, "config.json"), "--in", &p(d, "data.csv"), "--out", &out_a.to_string_lossy()]);
    assert_eq!(std::fs::read_dir(out_a.join("graphs")).unwrap().count(), 7);
    for f in ["fusion_gad.json", "fusion_mdd.json", "fusion_comorbid.json", "kernel_wl.csv", "kernel_degree.csv", "run_a.json"] {
        assert!(out_a.join(f).exists(), "{f}");
    }
    let k = std::fs::read_to_string(out_a.join("kernel_wl.csv")).unwrap();
    assert_eq!(k.lines().count(), 4);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out_a.join("run_a.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 11);

    let out_b = d.join("b");
    let stdout = ok(&["pipeline-b", "--config", &p(d, "config.json"), "--in", &p(d, "data.csv"), "--out", &out_b.to_string_lossy()]).stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("AUC"));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(out_b.join("report_b.json")).unwrap()).unwrap();
    assert_eq!(rep["classification"]["holdout"].as_array().unwrap().len(), 1);
    assert!(rep["baseline"]["auc"].is_number());
}

#[test]
fn bench_table3_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["bench-table3", "--seeds", "2", "--out", &p(dir.path(), "t3.json")]).stdout;
    let text = String::from_utf8_lossy(&out);
    assert!(text.contains("PCMCI+ (CMIknn)"));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t3.json")).unwrap()).unwrap();
    assert_eq!(rep["report"]["rows"].as_array().unwrap().len(), 12);
}
