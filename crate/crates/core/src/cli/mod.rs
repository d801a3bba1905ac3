//! Command-line runner: flag and config-file parsing, one experiment, report files.

mod args;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compress::CompressionPlan;
use crate::data::{load_csv, DataError, Task};
use crate::engine::{run_experiment, EngineError, ExperimentConfig};
use crate::learners::default_pool;
use crate::prune::PruneConfig;

pub use args::{Cli, Command, FsArg, MethodArg, RunArgs, Settings, TaskArg};
pub use report::{
    emit_reports, fold_means, summarize, DatasetFingerprint, LevelSummary, MeanStd, RunManifest, Summary,
    METRICS_HEADER, STACK_LEVEL,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("dataset error: {0}")]
    Dataset(#[from] DataError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot serialize summary: {0}")]
    Json(#[from] serde_json::Error),
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Load, run and report according to `settings`.
pub fn run(settings: &Settings) -> Result<Summary, CliError> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let bytes = std::fs::read(&settings.dataset).map_err(|source| CliError::Io {
        path: settings.dataset.clone(),
        source,
    })?;
    let dataset = load_csv(&settings.dataset, &settings.label, settings.categorical.as_deref())?;
    let classes = dataset.class_count();
    match (settings.task, dataset.task) {
        (TaskArg::Binary, Task::MultiClass) | (TaskArg::Multiclass, Task::Binary) => {
            return Err(CliError::ConfigInvalid(format!(
                "--task {:?} does not match a label with {classes} classes",
                settings.task
            )
            .to_lowercase()));
        }
        _ => {}
    }

    let cfg = ExperimentConfig {
        levels: settings.levels,
        outer_folds: settings.folds,
        inner_folds: settings.inner_folds,
        plan: CompressionPlan::new(settings.fs.into(), settings.method.into()),
        prune: PruneConfig {
            lambda: settings.lambda,
            t_min: settings.tmin,
            seed: 0,
        },
        pool: default_pool(dataset.task),
        seed: settings.seed,
    };
    let report = run_experiment(&dataset, &cfg)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: settings.clone(),
        dataset: DatasetFingerprint {
            path: settings.dataset.display().to_string(),
            rows: dataset.features.rows(),
            cols: dataset.features.cols(),
            classes,
            sha256: sha256_hex(&bytes),
        },
        pool: cfg.pool.ids(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
    };
    emit_reports(&report, manifest, &settings.out)
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let Command::Run(run_args) = cli.command;
    let result = Settings::resolve(&run_args).and_then(|s| run(&s));
    match result {
        Ok(summary) => {
            eprintln!(
                "wrote reports for {} levels to {}",
                summary.levels.len(),
                summary.manifest.config.out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
