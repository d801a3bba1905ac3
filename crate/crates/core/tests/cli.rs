mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rocketstack::cli::{main_with_args, CliError, FsArg, RunArgs, Settings, METRICS_HEADER};
use rocketstack::data::synthetic;
use rocketstack::stats;

fn dataset(dir: &Path, classes: usize) -> PathBuf {
    let path = dir.join("data.csv");
    common::write_csv(&synthetic::blobs(90, 3, classes, 1.2, 3), &path);
    path
}

fn run(csv: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args: Vec<String> = vec!["rocketstack".into(), "run".into(), "--dataset".into()];
    args.push(csv.display().to_string());
    args.extend(["--label".into(), "label".into(), "--out".into()]);
    args.push(out.display().to_string());
    args.extend(extra.iter().map(|s| s.to_string()));
    main_with_args(args)
}

const FAST: [&str; 6] = ["--levels", "2", "--folds", "3", "--inner-folds", "3"];

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn strip_timestamps(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    let m = v["manifest"].as_object_mut().unwrap();
    m.remove("started_at");
    m.remove("finished_at");
    v
}

#[test]
fn run_writes_every_report_with_fixed_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dataset(dir.path(), 3);
    let out = dir.path().join("out");
    assert_eq!(run(&csv, &out, &FAST), 0);

    let (header, rows) = read_rows(&out.join("metrics.csv"));
    assert_eq!(header, METRICS_HEADER);
    assert!(rows.iter().any(|r| r[1] == "sos"));
    for r in &rows {
        // multi-class: roc_auc stays empty
        assert_eq!(r[8], "");
        for cell in &r[3..8] {
            let v: f64 = cell.parse().unwrap();
            assert!(v.is_finite());
            let twelve: f64 = format!("{v:.11e}").parse().unwrap();
            assert_eq!(format!("{twelve:.11e}"), format!("{v:.11e}"));
        }
    }
    assert_eq!(read_rows(&out.join("features.csv")).0, ["fold", "level", "feature_count"]);
    assert_eq!(read_rows(&out.join("survivors.csv")).0, ["fold", "level", "survivors"]);
    let (header, rows) = read_rows(&out.join("runtime.csv"));
    assert_eq!(header, ["fold", "level", "model_id", "seconds", "normalized"]);
    let norm: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(norm.contains(&0.0) && norm.contains(&1.0));

    let (_, survivors) = read_rows(&out.join("survivors.csv"));
    let mut per_fold: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in survivors {
        per_fold.entry(r[0].clone()).or_default().push(r[2].parse().unwrap());
    }
    for counts in per_fold.values() {
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }
}

#[test]
fn summary_matches_recomputation_from_metrics_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dataset(dir.path(), 2);
    let out = dir.path().join("out");
    assert_eq!(run(&csv, &out, &FAST), 0);

    let (_, rows) = read_rows(&out.join("metrics.csv"));
    // (level, fold) -> rows in file order
    let mut groups: BTreeMap<(String, String), Vec<Vec<f64>>> = BTreeMap::new();
    for r in &rows {
        let vals: Vec<f64> = r[3..9].iter().map(|c| c.parse().unwrap()).collect();
        groups.entry((r[1].clone(), r[0].clone())).or_default().push(vals);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let keys = ["accuracy", "f1_w", "precision_w", "recall_w", "logloss", "roc_auc"];
    for level in summary["levels"].as_array().unwrap() {
        let name = level["level"].as_str().unwrap();
        for (k, key) in keys.iter().enumerate() {
            let fold_means: Vec<f64> = groups
                .iter()
                .filter(|((l, _), _)| l == name)
                .map(|(_, models)| stats::mean(&models.iter().map(|m| m[k]).collect::<Vec<_>>()))
                .collect();
            assert_eq!(level[key]["mean"].as_f64().unwrap(), stats::mean(&fold_means), "{name} {key}");
            assert_eq!(level[key]["std"].as_f64().unwrap(), stats::std_dev(&fold_means), "{name} {key}");
        }
    }
}

#[test]
fn identical_flags_give_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dataset(dir.path(), 2);
    let extra = [&FAST[..], &["--fs", "periodic", "--method", "ae2", "--lambda", "0.05", "--seed", "7"]].concat();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&csv, &a, &extra), 0);
    assert_eq!(run(&csv, &b, &extra), 0);
    let sa = std::fs::read_to_string(a.join("summary.json")).unwrap();
    let sb = std::fs::read_to_string(b.join("summary.json")).unwrap();
    let (mut va, mut vb) = (strip_timestamps(&sa), strip_timestamps(&sb));
    // the output directory is echoed in the config
    va["manifest"]["config"]["out"] = serde_json::Value::Null;
    vb["manifest"]["config"]["out"] = serde_json::Value::Null;
    assert_eq!(va, vb);
    assert_eq!(
        std::fs::read(a.join("metrics.csv")).unwrap(),
        std::fs::read(b.join("metrics.csv")).unwrap()
    );
}

#[test]
fn zero_levels_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dataset(dir.path(), 2);
    assert_ne!(run(&csv, &dir.path().join("out"), &["--levels", "0"]), 0);
    let args = RunArgs {
        dataset: Some(csv),
        label: Some("label".into()),
        levels: Some(0),
        ..RunArgs::default()
    };
    assert!(matches!(Settings::resolve(&args), Err(CliError::ConfigInvalid(_))));
}

#[test]
fn lambda_outside_unit_interval_is_rejected() {
    let args = RunArgs {
        dataset: Some("x.csv".into()),
        label: Some("y".into()),
        lambda: Some(1.5),
        ..RunArgs::default()
    };
    assert!(matches!(Settings::resolve(&args), Err(CliError::ConfigInvalid(_))));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"dataset": "d.csv", "label": "y", "levels": 4, "fs": "each", "categorical": "a, b", "inner-folds": 4}"#,
    )
    .unwrap();
    let args = RunArgs {
        config: Some(cfg),
        levels: Some(2),
        ..RunArgs::default()
    };
    let s = Settings::resolve(&args).unwrap();
    assert_eq!(s.levels, 2);
    assert_eq!(s.fs, FsArg::Each);
    assert_eq!(s.inner_folds, 4);
    assert_eq!(s.categorical, Some(vec!["a".to_string(), "b".to_string()]));
    assert_eq!(s.tmin, 2);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"dataset": "d.csv", "label": "y", "depth": 3}"#).unwrap();
    let args = RunArgs {
        config: Some(cfg),
        ..RunArgs::default()
    };
    assert!(matches!(Settings::resolve(&args), Err(CliError::ConfigInvalid(_))));
}

#[test]
fn dataset_problems_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_ne!(run(&dir.path().join("missing.csv"), &out, &FAST), 0);
    let csv = dataset(dir.path(), 3);
    assert_ne!(run(&csv, &out, &[&FAST[..], &["--task", "binary"]].concat()), 0);
    let mut args: Vec<String> = vec!["rocketstack".into(), "run".into(), "--dataset".into()];
    args.push(csv.display().to_string());
    args.extend(["--label".into(), "nope".into()]);
    assert_ne!(main_with_args(args), 0);
}
