use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ipec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipec")).args(args).output().expect("spawn ipec")
}

const CONFIG: &str = r#"{
  "dataset": { "synthetic": { "dimension": 4, "samples_per_class": 40, "seed": 3,
    "classes": [
      { "id": 0, "mean_seed": 11, "mean_stddev": 1.0, "stddev": 1.0 },
      { "id": 1, "mean_seed": 11, "mean_stddev": 1.0, "stddev": 1.0 },
      { "id": 2, "mean_seed": 11, "mean_stddev": 1.0, "stddev": 1.0 },
      { "id": 3, "mean_seed": 11, "mean_stddev": 1.0, "stddev": 1.0 } ] } },
  "run": { "mode": "pn", "n_way": 3, "k_shot": 1, "m_query": 5, "test_batches": 12, "seed": 5 }
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn subdirs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    v
}

#[test]
fn minimal_pn_run_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let out = tmp.path().join("out");
    let o = ipec(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dirs = subdirs(&out);
    assert_eq!(dirs.len(), 1);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].join("report.json")).unwrap()).unwrap();
    assert!(report["mean_accuracy"].is_number());
    assert_eq!(report["config"]["mode"], "pn");
    for f in ["predictions.csv", "curves.csv", "aux_dump.csv"] {
        assert!(dirs[0].join(f).is_file(), "{f}");
    }
    let curves = std::fs::read_to_string(dirs[0].join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 12);
}

#[test]
fn strategy_sweep_makes_three_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let text = CONFIG.replace(
        "\"seed\": 5 }",
        "\"seed\": 5 },\n  \"sweep\": { \"strategy\": [\"ADD\", \"REPLACE\", \"REMOVE\"] }",
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = ipec(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--mode", "ipec", "--jobs", "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep: 3 run(s)"));
    assert_eq!(subdirs(&out).len(), 3);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("\"pn\"", "\"turbo\""));
    let o = ipec(&["run", "--config", cfg.to_str().unwrap(), "--out", "unused"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line "));

    let cfg = write_config(tmp.path(), CONFIG);
    let o = ipec(&["run", "--config", cfg.to_str().unwrap(), "--out", "unused", "--mode", "turbo"]);
    assert_eq!(o.status.code(), Some(2));

    let o = ipec(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", "unused", "--mode", "ipec_two_stage",
    ]);
    assert_eq!(o.status.code(), Some(2), "two-stage without warm-up");
}

#[test]
fn compare_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = ipec(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (ra, rb) = (subdirs(&a).remove(0), subdirs(&b).remove(0));
    let csv = tmp.path().join("comparison.csv");
    let o = ipec(&[
        "compare", "--runs", ra.to_str().unwrap(), rb.to_str().unwrap(), "--out", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);

    let o = ipec(&["compare", "--runs"]);
    assert_eq!(o.status.code(), Some(2));

    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = ipec(&["compare", "--runs", empty.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn file_dataset_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("class_id,sample_id,f0,f1\n");
    let mut id = 0;
    for c in 0..3 {
        for i in 0..10 {
            csv.push_str(&format!("{c},{id},{},{}\n", c as f64 * 3.0 + i as f64 * 0.01, -(c as f64)));
            id += 1;
        }
    }
    std::fs::write(tmp.path().join("emb.csv"), csv).unwrap();
    let text = r#"{ "dataset": { "file": { "path": "emb.csv" } },
        "run": { "mode": "ipec", "n_way": 3, "k_shot": 1, "m_query": 4, "test_batches": 6, "seed": 1 } }"#;
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = ipec(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--tau", "0.2", "--batches", "9",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = subdirs(&out).remove(0);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["test_batches"], 9);
    assert_eq!(report["config"]["thresholds"]["tau"], 0.2);
    assert!(report["convergence"].is_null());
}
