//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Source};
use crate::solvers::WeightRecord;
use crate::CliError;

/// Scientific notation with 17 significant digits, enough to round-trip any f64.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct RunSection<'a> {
    experiment: &'a str,
    version: &'a str,
    timestamp: String,
    threads: usize,
    available_cores: usize,
    serial: bool,
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_file: Option<String>,
}

#[derive(Debug, Serialize)]
struct Precedence<'a> {
    order: &'a str,
    sources: &'a BTreeMap<&'static str, Source>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    run: RunSection<'a>,
    config: &'a ExperimentConfig,
    precedence: Precedence<'a>,
    weights: &'a [WeightRecord],
    results: Results<'a>,
}

#[derive(Debug, Serialize)]
struct Results<'a> {
    outputs: Vec<String>,
    notes: &'a [String],
    summary: &'a BTreeMap<String, f64>,
}

pub struct ManifestInput<'a> {
    pub cfg: &'a ExperimentConfig,
    pub weights: &'a [WeightRecord],
    pub outputs: &'a [PathBuf],
    pub notes: &'a [String],
    pub summary: &'a BTreeMap<String, f64>,
}

/// Writes `manifest.toml` next to the outputs.
pub fn write_manifest(input: ManifestInput<'_>) -> Result<PathBuf, CliError> {
    let cfg = input.cfg;
    let manifest = Manifest {
        run: RunSection {
            experiment: cfg.experiment.name(),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            threads: cfg.threads,
            available_cores: crate::config::available_cores(),
            serial: cfg.serial(),
            command: cfg.command_line(),
            config_file: cfg.config_file.as_ref().map(|p| p.display().to_string()),
        },
        config: cfg,
        precedence: Precedence {
            order: "flag > file > default",
            sources: &cfg.sources,
        },
        weights: input.weights,
        results: Results {
            outputs: input
            .outputs
                .iter()
                .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned()))
                .collect(),
            notes: input.notes,
            summary: input.summary,
        },
    };
    let text = toml::to_string_pretty(&manifest)?;
    let path = cfg.out.join("manifest.toml");
    std::fs::write(&path, text)?;
    Ok(path)
}
