use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// One pass/fail line of an experiment's invariant suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable criterion, e.g. `<= 1e-8`.
    pub criterion: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("<= {bound:e}"),
            passed: value <= bound,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("< {bound:e}"),
            passed: value < bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!(">= {bound:e}"),
            passed: value >= bound,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("> {bound:e}"),
            passed: value > bound,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
        }
    }

    /// A check whose outcome is a predicate on `value` stated in `criterion`.
    pub fn holds(name: impl Into<String>, value: f64, criterion: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: criterion.into(),
            passed,
        }
    }
}

/// A CSV cell. Numbers are written with the shortest round-trip formatting,
/// so identical inputs give byte-identical files.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A CSV artifact with documented columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name, e.g. `penrose.csv`.
    pub file: String,
    /// `(name, description)` per column.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, columns: &[(&str, &str)]) -> Self {
        Self {
            file: file.into(),
            columns: columns.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of {}", self.file);
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(vec![]);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.0.as_str())).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }
}

/// One file written by a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    /// Data rows of a CSV; `None` for JSON reports.
    pub rows: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    InvariantFailure,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::InvariantFailure => 1,
            RunStatus::NumericalFailure => 3,
        }
    }
}

/// Written last, after every artifact it lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub versions: BTreeMap<String, String>,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub status: RunStatus,
    /// Stage that raised an error, when one did.
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    /// True when the run stopped early and the artifacts are incomplete.
    pub partial: bool,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_FILE: &str = "schema.json";

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Default)]
struct Ledger {
    stage: String,
    artifacts: Vec<Artifact>,
    checks: Vec<Check>,
    schema: BTreeMap<String, BTreeMap<String, String>>,
}

/// Collects the artifacts and checks of one run. Files are written as soon as
/// they are handed over, each one atomically, so sweep points can report from
/// worker threads.
pub struct Recorder {
    dir: PathBuf,
    inner: Mutex<Ledger>,
}

impl Recorder {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            inner: Mutex::new(Ledger::default()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stage(&self, name: &str) {
        log::info!("stage {name}");
        self.inner.lock().unwrap().stage = name.to_string();
    }

    pub fn current_stage(&self) -> String {
        self.inner.lock().unwrap().stage.clone()
    }

    pub fn table(&self, table: &Table) -> Result<()> {
        let bytes = table.to_bytes()?;
        write_atomic(&self.dir.join(&table.file), &bytes)?;
        let mut inner = self.inner.lock().unwrap();
        inner.schema.insert(table.file.clone(), table.columns.iter().cloned().collect());
        inner.artifacts.push(Artifact {
            file: table.file.clone(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            rows: Some(table.rows.len()),
        });
        Ok(())
    }

    pub fn json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&self.dir.join(file), &bytes)?;
        self.inner.lock().unwrap().artifacts.push(Artifact {
            file: file.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            rows: None,
        });
        Ok(())
    }

    pub fn check(&self, check: Check) {
        log::debug!(
            "{} {}: {:e} ({})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.criterion
        );
        self.inner.lock().unwrap().checks.push(check);
    }

    pub fn checks(&self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.check(c);
        }
    }

    /// Writes the schema and then the manifest.
    pub(crate) fn finish(self, mut manifest: Manifest) -> Result<Manifest> {
        let inner = self.inner.into_inner().unwrap();
        let mut schema = serde_json::to_vec_pretty(&inner.schema).map_err(|e| Error::Format(e.to_string()))?;
        schema.push(b'\n');
        write_atomic(&self.dir.join(SCHEMA_FILE), &schema)?;
        let mut artifacts = inner.artifacts;
        artifacts.sort_by(|a, b| a.file.cmp(&b.file));
        manifest.artifacts = artifacts;
        manifest.checks = inner.checks;
        if manifest.status == RunStatus::Pass && manifest.checks.iter().any(|c| !c.passed) {
            manifest.status = RunStatus::InvariantFailure;
        }
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        bytes.push(b'\n');
        write_atomic(&self.dir.join(MANIFEST_FILE), &bytes)?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let bytes = fs::read(dir.join(MANIFEST_FILE))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", MANIFEST_FILE)))
}

/// Relative tolerance of `--check` on numeric CSV cells.
pub const CHECK_RTOL: f64 = 1e-9;
/// Absolute floor of `--check` on numeric CSV cells.
pub const CHECK_ATOL: f64 = 1e-12;

/// Differences between two CSV files, cell by cell: numbers agree within
/// `CHECK_RTOL` relative or `CHECK_ATOL` absolute, text must match exactly.
pub fn compare_csv(stored: &Path, fresh: &Path) -> Result<Vec<String>> {
    let read = |p: &Path| -> Result<Vec<Vec<String>>> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(p)
            .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
        r.records()
            .map(|rec| {
                rec.map(|r| r.iter().map(str::to_string).collect())
                    .map_err(|e| Error::Format(e.to_string()))
            })
            .collect()
    };
    let (a, b) = (read(stored)?, read(fresh)?);
    let name = stored.file_name().unwrap_or_default().to_string_lossy().to_string();
    let mut out = vec![];
    if a.len() != b.len() {
        out.push(format!("{name}: {} rows stored, {} recomputed", a.len(), b.len()));
        return Ok(out);
    }
    for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
        if ra.len() != rb.len() {
            out.push(format!("{name} line {}: width {} vs {}", i + 1, ra.len(), rb.len()));
            continue;
        }
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            let same = match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    (x.is_nan() && y.is_nan()) || (x - y).abs() <= CHECK_ATOL.max(CHECK_RTOL * x.abs().max(y.abs()))
                }
                _ => x == y,
            };
            if !same {
                out.push(format!("{name} line {} column {}: stored {x}, recomputed {y}", i + 1, j + 1));
            }
        }
    }
    Ok(out)
}
