mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use common::{synthetic_csv, write_csv};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_taxotrack"));
    for (k, _) in std::env::vars() {
        if k.starts_with("TAXOTRACK_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(o: &Output) -> &[u8] {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    &o.stdout
}

fn dataset(dir: &Path) -> String {
    write_csv(dir, "walks.csv", &synthetic_csv(40, 20, 50, 11)).to_string_lossy().into_owned()
}

/// Two zones with at least two members each, as "a,b".
fn populated_zones(input: &str, combo: &str) -> String {
    let zoned = String::from_utf8(ok(&run(&["score", "--input", input, "--combo", combo])).to_vec()).unwrap();
    let mut counts = [0usize; 4];
    for line in zoned.lines().skip(1) {
        counts[line.rsplit(',').next().unwrap().parse::<usize>().unwrap()] += 1;
    }
    let z: Vec<String> = (0..4).filter(|&i| counts[i] >= 2).map(|i| i.to_string()).collect();
    assert!(z.len() >= 2, "{counts:?}");
    format!("{},{}", z[0], z[1])
}

#[test]
fn prep_reports_cleaning() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = synthetic_csv(6, 10, 12, 1);
    csv.push_str("broken,not-a-time,1,2\nsolo,0,10,10\n");
    let p = write_csv(dir.path(), "walks.csv", &csv);
    let v: Value = serde_json::from_slice(ok(&run(&["prep", "--input", p.to_str().unwrap()]))).unwrap();
    assert_eq!(v["report"]["trajectories"], 6);
    assert_eq!(v["report"]["rows_dropped"], 1);
    assert_eq!(v["report"]["trajectories_rejected"], 1);
    assert_eq!(v["dataset_id"].as_str().unwrap().len(), 16);
}

#[test]
fn vectorize_then_score_through_files_and_pipes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let vec_path = dir.path().join("v.csv");
    ok(&run(&["vectorize", "--input", &input, "-o", vec_path.to_str().unwrap()]));
    let vectors = std::fs::read(&vec_path).unwrap();
    let text = String::from_utf8(vectors.clone()).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 73);
    assert_eq!(header[0], "trajectory_id");
    assert_eq!(text.lines().count(), 41);

    let from_file = run(&["score", "--vectors", vec_path.to_str().unwrap(), "--combo", "curvature-speed"]);
    let from_pipe = run_stdin(&["score", "--vectors", "-", "--combo", "speed-curvature"], &vectors);
    let from_raw = run(&["score", "--input", &input, "--combo", "curvature-speed"]);
    assert_eq!(ok(&from_file), ok(&from_pipe));
    assert_eq!(ok(&from_file), ok(&from_raw));
    let zoned = String::from_utf8(from_file.stdout).unwrap();
    assert_eq!(zoned.lines().next().unwrap(), "trajectory_id,combination,x_node,y_node,x,y,zone");
    assert_eq!(zoned.lines().count(), 41);
}

#[test]
fn heatmap_formats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let v: Value = serde_json::from_slice(ok(&run(&["heatmap", "--input", &input]))).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    let csv = String::from_utf8(ok(&run(&["heatmap", "--input", &input, "--out-format", "csv"])).to_vec()).unwrap();
    assert_eq!(csv.lines().count(), 8);
    for line in csv.lines().skip(1) {
        let sum: usize = line.split(',').skip(3).map(|c| c.parse::<usize>().unwrap()).sum();
        assert_eq!(sum, 40);
    }
}

#[test]
fn compare_writes_report_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let csv_out = dir.path().join("cols.csv");
    let zones = populated_zones(&input, "curvature-speed");
    let out = run(&[
        "compare", "--input", &input, "--combo", "curvature-speed", "--zones", &zones, "--seed", "9",
        "--csv", csv_out.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    let body = ok(&out);
    let v: Value = serde_json::from_slice(body).unwrap();
    assert_eq!(v["combination"], "curvature-speed");
    assert!(stderr.contains("\"effective_config\""));
    assert!(stderr.contains("\"seed\":9"));
    let cols = std::fs::read_to_string(csv_out).unwrap();
    assert!(cols.lines().count() > 1);

    let again = run(&[
        "compare", "--input", &input, "--combo", "curvature-speed", "--zones", &zones, "--seed", "9",
    ]);
    assert_eq!(body, ok(&again));
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let out = run(&["score", "--input", &input, "--combo", "kinematic-speed"]);
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    let err: Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert_eq!(err["error"]["reason"], "parent_child");

    let out = run(&["compare", "--input", &input, "--combo", "curvature-speed", "--zones", "1,1"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(err["error"]["code"], "identical_zones");

    let out = run(&["tune", "--input", &input, "--combo", "curvature-speed", "--zones", "3,3"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(err["error"]["code"], "identical_zones");

    let out = run(&["score", "--combo", "curvature-speed"]);
    assert!(!out.status.success());
}

#[test]
fn sample_single_and_pair() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let one = run(&["sample", "--input", &input, "--tid", "traj-0003", "--variable", "acceleration_quant_max"]);
    let v: Value = serde_json::from_slice(ok(&one)).unwrap();
    assert_eq!(v["kind"], "anchored");
    let pair = run(&[
        "sample", "--input", &input, "--tid", "traj-0003", "--other", "traj-0007", "--variable", "distance_geometry_3_2",
    ]);
    let v: Value = serde_json::from_slice(ok(&pair)).unwrap();
    assert_eq!(v["windows"][1]["trajectory_id"], "traj-0007");
    assert_eq!(v["windows"][0]["kind"], "signature_segment");
}

#[test]
fn tune_with_reduced_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let zones = populated_zones(&input, "curvature-speed");
    let out = run(&[
        "tune", "--input", &input, "--combo", "curvature-speed", "--zones", &zones, "--folds", "2", "--n-trees", "5,10",
        "--depths", "3",
    ]);
    let v: Value = serde_json::from_slice(ok(&out)).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 4);
    assert!(v["best"].as_u64().unwrap() < 4);
}

#[test]
fn config_file_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = dataset(dir.path());
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[forest]\nn_trees = 7\n").unwrap();
    let out = bin()
        .args(["score", "--input", &input, "--combo", "curvature-speed", "--config", cfg.to_str().unwrap()])
        .env("TAXOTRACK_DBOS_SEED", "5")
        .output()
        .unwrap();
    ok(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let eff: Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
    assert_eq!(eff["effective_config"]["forest"]["n_trees"], 7);
    assert_eq!(eff["effective_config"]["dbos"]["seed"], 5);
}
