//! End-to-end runs of the `vnreg` binary: outputs, exit codes and logging.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vnreg::experiment::{sample_scenario, ExperimentConfig};
use vnreg::io::{read_json, write_edge_list};

fn vnreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vnreg"))
        .args(args)
        .env_remove("VNREG_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn config_path(name: &str) -> String {
    [env!("CARGO_MANIFEST_DIR"), "configs", name]
        .iter()
        .collect::<PathBuf>()
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small clean/contaminated pair plus query and seed files.
fn write_pair(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
name = "cli"
scenario = "block"
[model]
b = [[0.7, 0.2], [0.2, 0.3]]
core_sizes = [60, 60]
rho = 0.9
[contamination]
m = 48
"#,
    )
    .unwrap();
    let sample = sample_scenario(&cfg, 5).unwrap();
    let (g1, g2) = (dir.join("g1.txt"), dir.join("g2.txt"));
    write_edge_list(&g1, &sample.g1).unwrap();
    write_edge_list(&g2, &sample.g2).unwrap();
    std::fs::write(dir.join("queries.txt"), "0\n1\n70\n").unwrap();
    let seeds: String = (0..120).step_by(12).map(|u| format!("{u} {}\n", sample.truth[u])).collect();
    std::fs::write(dir.join("seeds.txt"), seeds).unwrap();
    (g1, g2)
}

#[test]
fn check_prints_the_contaminated_matrix_and_margins() {
    let out = vnreg(&["check", "--config", &config_path("block_m400_rho07.toml")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.7000 0.7600 0.5600 0.2000 0.3600 0.1600"), "{text}");
    assert!(text.contains("A1.1"), "{text}");
}

#[test]
fn unknown_config_key_is_a_config_error_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \"x\"\nscenario = \"block\"\nreplicatez = 3\n").unwrap();
    let out = vnreg(&["simulate", "--config", s(&path)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("replicatez"), "{err}");
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "name = \"x\"\nscenario = \"block\"\n[model]\nb = [[0.7, 1.5], [1.5, 0.3]]\ncore_sizes = [10, 10]\n[contamination]\nm = 8\n",
    )
    .unwrap();
    assert_eq!(code(&vnreg(&["simulate", "--config", s(&path)])), 2);
}

#[test]
fn missing_input_is_an_io_error() {
    let out = vnreg(&["simulate", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    let out = vnreg(&["embed", "/nonexistent/graph.txt", "--out", "/tmp/unused"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn malformed_edge_list_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "0 1\n1 2\n2 x\n").unwrap();
    let out = vnreg(&["embed", s(&path), "--out", s(&dir.path().join("e"))]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains(":3"), "{}", stderr(&out));
}

#[test]
fn embed_writes_positions_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let (_, g2) = write_pair(dir.path());
    let out_dir = dir.path().join("emb");
    let out = vnreg(&["embed", s(&g2), "--out", s(&out_dir), "--d1", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("embedding.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "dim_1,dim_2,dim_3");
    assert_eq!(csv.lines().count(), 1 + 168);
    assert!(out_dir.join("embedding.json").exists());
}

#[test]
fn rank_deficient_dimension_is_a_pipeline_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "# vertices: 4\n0 1\n").unwrap();
    let out = vnreg(&["embed", s(&path), "--out", s(&dir.path().join("e")), "--d1", "3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    // a dimension above the vertex count is rejected as a bad value
    let out = vnreg(&["embed", s(&path), "--out", s(&dir.path().join("e")), "--d1", "5"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn clean_then_nominate() {
    let dir = tempfile::tempdir().unwrap();
    let (g1, g2) = write_pair(dir.path());
    let clean_dir = dir.path().join("clean");
    let out = vnreg(&[
        "clean", s(&g1), s(&g2), "--out", s(&clean_dir), "--d1", "2", "--d2", "6", "--k1", "2", "--k2", "6",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(clean_dir.read_dir().unwrap().count() > 0);

    let nom_dir = dir.path().join("nominate");
    let queries = dir.path().join("queries.txt");
    let out = vnreg(&[
        "nominate", s(&g1), s(&g2), s(&queries), "--out", s(&nom_dir), "--d1", "2", "--d2", "6", "--k1", "2", "--k2",
        "6",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(nom_dir.join("nominations.csv")).unwrap();
    assert!(csv.starts_with("query_id,rank,candidate_id,score\n"));
    let summary: serde_json::Value = read_json(nom_dir.join("summary.json")).unwrap();
    assert_eq!(summary["queries"], 3);
}

#[test]
fn nominate_without_trimming_uses_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let (g1, g2) = write_pair(dir.path());
    let out_dir = dir.path().join("n");
    let queries = dir.path().join("queries.txt");
    let base = [
        "nominate",
        s(&g1),
        s(&g2),
        s(&queries),
        "--out",
        s(&out_dir),
        "--d1",
        "2",
        "--no-trim",
    ];
    // Without a seeds file the unaligned run is refused.
    assert_eq!(code(&vnreg(&base)), 2);
    let seeds = dir.path().join("seeds.txt");
    let mut args = base.to_vec();
    args.extend(["--seeds-file", s(&seeds)]);
    let out = vnreg(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = read_json(out_dir.join("summary.json")).unwrap();
    assert_eq!(summary["candidates"], 168);
}

#[test]
fn query_outside_the_clean_graph_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (g1, g2) = write_pair(dir.path());
    let queries = dir.path().join("q.txt");
    std::fs::write(&queries, "500\n").unwrap();
    let out = vnreg(&["nominate", s(&g1), s(&g2), s(&queries), "--out", s(&dir.path().join("n"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn resample_experiment_writes_precision_curves() {
    let dir = tempfile::tempdir().unwrap();
    let (g1, _) = write_pair(dir.path());
    let labels: String = (0..120).map(|v| format!("{}\n", v / 60)).collect();
    let labels_path = dir.path().join("labels.txt");
    std::fs::write(&labels_path, labels).unwrap();
    let out_dir = dir.path().join("r");
    let out = vnreg(&[
        "resample-experiment",
        s(&g1),
        "--labels",
        s(&labels_path),
        "--out",
        s(&out_dir),
        "--m",
        "40",
        "--k-max",
        "20",
        "--lambda",
        "0.3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["precision_class_0.csv", "precision_class_1.svg", "kept.txt", "summary.json"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
}

#[test]
fn simulate_writes_curves_plots_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let out = Command::new(env!("CARGO_BIN_EXE_vnreg"))
        .args([
            "simulate",
            "--config",
            &config_path("smoke.toml"),
            "--replicates",
            "1",
            "--jobs",
            "1",
            "--seed",
            "3",
            "--out",
            s(&out_dir),
        ])
        .env("VNREG_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("replicate 0"), "info logging should reach stderr");
    for f in ["config.toml", "curves.csv", "summary.json", "diagnostics.json", "mean_model_trim.csv", "model_trim.svg"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let svg = std::fs::read_to_string(out_dir.join("model_trim.svg")).unwrap();
    assert!(svg.starts_with("<svg") && !svg.contains("href"));
    let written = std::fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&written).unwrap().seed, 3);
}
