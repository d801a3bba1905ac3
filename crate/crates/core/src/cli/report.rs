//! Report files. Every float is written in shortest round-trip form, so the
//! CSVs re-parse to the exact values the summary was computed from.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::args::Settings;
use super::CliError;
use crate::engine::{FoldReport, ModelResult, RunReport};
use crate::metrics::MetricsRecord;
use crate::stats;

pub const METRICS_HEADER: [&str; 9] = [
    "fold",
    "level",
    "model_id",
    "accuracy",
    "f1_w",
    "precision_w",
    "recall_w",
    "logloss",
    "roc_auc",
];

/// Label used for the stack-of-stacking rows in the level column.
pub const STACK_LEVEL: &str = "sos";

#[derive(Debug, Clone, Serialize)]
pub struct DatasetFingerprint {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
    pub classes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: Settings,
    pub dataset: DatasetFingerprint,
    pub pool: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        Self {
            mean: stats::mean(values),
            std: stats::std_dev(values),
        }
    }
}

/// Fold-level aggregates of one level: each fold contributes the mean over
/// the models evaluated there, then mean and population std run over folds.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub level: String,
    pub folds: usize,
    pub accuracy: MeanStd,
    pub f1_w: MeanStd,
    pub precision_w: MeanStd,
    pub recall_w: MeanStd,
    pub logloss: MeanStd,
    pub roc_auc: Option<MeanStd>,
    pub feature_count: MeanStd,
    pub survivors: Option<MeanStd>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub manifest: RunManifest,
    pub levels: Vec<LevelSummary>,
    /// Level at which each fold halted, if it did.
    pub halted_at: Vec<Option<usize>>,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn metric_values(m: &MetricsRecord) -> [f64; 5] {
    [
        m.accuracy,
        m.f1_weighted,
        m.precision_weighted,
        m.recall_weighted,
        m.log_loss,
    ]
}

/// `(level label, models)` in report order, stack-of-stacking last.
fn level_rows(fold: &FoldReport) -> Vec<(String, &[ModelResult])> {
    let mut out: Vec<(String, &[ModelResult])> = fold
        .levels
        .iter()
        .map(|l| (l.level.to_string(), l.models.as_slice()))
        .collect();
    out.push((STACK_LEVEL.to_owned(), fold.stack_of_stack.as_slice()));
    out
}

/// Per-fold model-mean of every metric, in the same order the rows are written.
pub fn fold_means(models: &[ModelResult]) -> ([f64; 5], Option<f64>) {
    let mut means = [0.0; 5];
    for (k, slot) in means.iter_mut().enumerate() {
        let v: Vec<f64> = models.iter().map(|m| metric_values(&m.metrics)[k]).collect();
        *slot = stats::mean(&v);
    }
    let auc: Option<Vec<f64>> = models.iter().map(|m| m.metrics.roc_auc).collect();
    (means, auc.map(|v| stats::mean(&v)))
}

pub fn summarize(report: &RunReport, manifest: RunManifest) -> Summary {
    let mut labels: Vec<String> = Vec::new();
    for fold in &report.folds {
        for (label, _) in level_rows(fold) {
            if !labels.contains(&label) {
                labels.push(label);
            }
        }
    }
    // numeric levels first, in order, then the stack row
    labels.sort_by_key(|l| l.parse::<usize>().unwrap_or(usize::MAX));

    let levels = labels
        .into_iter()
        .map(|label| {
            let mut per_metric: [Vec<f64>; 5] = Default::default();
            let mut aucs: Vec<Option<f64>> = Vec::new();
            let mut widths = Vec::new();
            let mut survivors = Vec::new();
            for fold in &report.folds {
                let Some((_, models)) = level_rows(fold).into_iter().find(|(l, _)| *l == label) else {
                    continue;
                };
                let (means, auc) = fold_means(models);
                for (k, m) in means.into_iter().enumerate() {
                    per_metric[k].push(m);
                }
                aucs.push(auc);
                if label == STACK_LEVEL {
                    widths.push(fold.stack_width as f64);
                } else if let Some(l) = fold.levels.iter().find(|l| l.level.to_string() == label) {
                    widths.push(l.feature_count as f64);
                    survivors.push(l.survivors.len() as f64);
                }
            }
            let auc: Option<Vec<f64>> = aucs.into_iter().collect();
            LevelSummary {
                folds: widths.len(),
                accuracy: MeanStd::of(&per_metric[0]),
                f1_w: MeanStd::of(&per_metric[1]),
                precision_w: MeanStd::of(&per_metric[2]),
                recall_w: MeanStd::of(&per_metric[3]),
                logloss: MeanStd::of(&per_metric[4]),
                roc_auc: auc.map(|v| MeanStd::of(&v)),
                feature_count: MeanStd::of(&widths),
                survivors: (!survivors.is_empty()).then(|| MeanStd::of(&survivors)),
                level: label,
            }
        })
        .collect();
    Summary {
        manifest,
        levels,
        halted_at: report.folds.iter().map(FoldReport::halted_at).collect(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_owned(),
        source: e.into(),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Write metrics, features, runtime and survivor CSVs plus `summary.json`.
pub fn emit_reports(report: &RunReport, manifest: RunManifest, out_dir: &Path) -> Result<Summary, CliError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut metrics_rows = Vec::new();
    let mut runtime = Vec::new();
    for fold in &report.folds {
        for (label, models) in level_rows(fold) {
            for m in models {
                let mut row = vec![fold.fold.to_string(), label.clone(), m.model_id.clone()];
                row.extend(metric_values(&m.metrics).iter().map(|&v| fmt(v)));
                row.push(m.metrics.roc_auc.map(fmt).unwrap_or_default());
                metrics_rows.push(row);
                runtime.push((fold.fold, label.clone(), m.model_id.clone(), m.seconds));
            }
        }
    }
    write_csv(&out_dir.join("metrics.csv"), &METRICS_HEADER, metrics_rows)?;

    let features = report
        .folds
        .iter()
        .flat_map(|f| {
            f.levels
                .iter()
                .map(move |l| vec![f.fold.to_string(), l.level.to_string(), l.feature_count.to_string()])
        })
        .collect();
    write_csv(&out_dir.join("features.csv"), &["fold", "level", "feature_count"], features)?;

    let survivors = report
        .folds
        .iter()
        .flat_map(|f| {
            f.levels
                .iter()
                .map(move |l| vec![f.fold.to_string(), l.level.to_string(), l.survivors.len().to_string()])
        })
        .collect();
    write_csv(&out_dir.join("survivors.csv"), &["fold", "level", "survivors"], survivors)?;

    let (lo, hi) = runtime
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.3), hi.max(r.3)));
    let span = hi - lo;
    let runtime_rows = runtime
        .into_iter()
        .map(|(fold, level, id, secs)| {
            let norm = if span > 0.0 { (secs - lo) / span } else { 0.0 };
            vec![fold.to_string(), level, id, fmt(secs), fmt(norm)]
        })
        .collect();
    write_csv(
        &out_dir.join("runtime.csv"),
        &["fold", "level", "model_id", "seconds", "normalized"],
        runtime_rows,
    )?;

    let summary = summarize(report, manifest);
    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(summary)
}
