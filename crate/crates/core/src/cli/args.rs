use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::compress::{Method, Schedule};

#[derive(Debug, Parser)]
#[command(name = "rocketstack", version, about = "Recursive stacking experiments on tabular CSV data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run outer cross-validation and write reports.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Auto,
    Binary,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FsArg {
    None,
    Each,
    Periodic,
}

impl From<FsArg> for Schedule {
    fn from(f: FsArg) -> Self {
        match f {
            FsArg::None => Schedule::None,
            FsArg::Each => Schedule::EachLevel,
            FsArg::Periodic => Schedule::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Sfe,
    Ae2,
    Ae3,
    Attention,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sfe => Method::Sfe,
            MethodArg::Ae2 => Method::Ae2,
            MethodArg::Ae3 => Method::Ae3,
            MethodArg::Attention => Method::Attention,
        }
    }
}

/// Flags for `run`. Every flag may also come from `--config`; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Name of the label column.
    #[arg(long)]
    pub label: Option<String>,
    /// Comma-separated categorical columns [default: detect non-numeric columns].
    #[arg(long, value_delimiter = ',')]
    pub categorical: Option<Vec<String>>,
    /// Task type [default: auto].
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Number of stacking levels, at least 1 [default: 10].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Feature compression schedule [default: none].
    #[arg(long, value_enum)]
    pub fs: Option<FsArg>,
    /// Compression method used when the schedule fires [default: sfe].
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Pruning blur in [0, 1]; 0 is strict, 0.05 and 0.1 are the usual light settings [default: 0].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Minimum surviving models before the recursion halts [default: 2].
    #[arg(long)]
    pub tmin: Option<usize>,
    /// Outer cross-validation folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Inner folds for out-of-fold meta-features [default: 5].
    #[arg(long)]
    pub inner_folds: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: results].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Columns {
    List(Vec<String>),
    Joined(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    dataset: Option<PathBuf>,
    label: Option<String>,
    categorical: Option<Columns>,
    task: Option<TaskArg>,
    levels: Option<usize>,
    fs: Option<FsArg>,
    method: Option<MethodArg>,
    lambda: Option<f64>,
    tmin: Option<usize>,
    folds: Option<usize>,
    #[serde(alias = "inner_folds")]
    inner_folds: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

/// Fully resolved run settings, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub dataset: PathBuf,
    pub label: String,
    pub categorical: Option<Vec<String>>,
    pub task: TaskArg,
    pub levels: usize,
    pub fs: FsArg,
    pub method: MethodArg,
    pub lambda: f64,
    pub tmin: usize,
    pub folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub out: PathBuf,
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))
}

impl Settings {
    /// Merge flags over the optional config file, apply defaults and validate.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        let categorical = args.categorical.clone().or(file.categorical.map(|c| match c {
            Columns::List(v) => v,
            Columns::Joined(s) => s.split(',').map(|t| t.trim().to_owned()).collect(),
        }));
        let settings = Settings {
            dataset: args
                .dataset
                .clone()
                .or(file.dataset)
                .ok_or_else(|| CliError::ConfigInvalid("--dataset is required".into()))?,
            label: args
                .label
                .clone()
                .or(file.label)
                .ok_or_else(|| CliError::ConfigInvalid("--label is required".into()))?,
            categorical,
            task: args.task.or(file.task).unwrap_or(TaskArg::Auto),
            levels: args.levels.or(file.levels).unwrap_or(10),
            fs: args.fs.or(file.fs).unwrap_or(FsArg::None),
            method: args.method.or(file.method).unwrap_or(MethodArg::Sfe),
            lambda: args.lambda.or(file.lambda).unwrap_or(0.0),
            tmin: args.tmin.or(file.tmin).unwrap_or(2),
            folds: args.folds.or(file.folds).unwrap_or(5),
            inner_folds: args.inner_folds.or(file.inner_folds).unwrap_or(5),
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("results")),
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::ConfigInvalid(m));
        if self.levels < 1 {
            return bad(format!("levels must be at least 1, got {}", self.levels));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if self.tmin < 1 {
            return bad("tmin must be at least 1".into());
        }
        if self.folds < 2 || self.inner_folds < 2 {
            return bad(format!(
                "folds and inner-folds must be at least 2, got {} and {}",
                self.folds, self.inner_folds
            ));
        }
        Ok(())
    }
}
