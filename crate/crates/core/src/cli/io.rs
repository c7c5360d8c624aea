//! File formats: complex matrices, ensemble files, reports, CSV, the manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::experiments::{Report, Table};
use super::{CliError, MANIFEST};
use crate::linalg::{c, CMatrix};
use crate::observables::Povm;
use crate::qstate::{DensityOperator, Distribution};

/// A complex matrix as `[[re, im], ...]` in row-major order.
pub type ComplexEntries = Vec<[f64; 2]>;

pub fn matrix_to_json(m: &CMatrix) -> ComplexEntries {
    (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |col| [m[(r, col)].re, m[(r, col)].im])).collect()
}

pub fn matrix_from_json(entries: &[[f64; 2]]) -> Result<CMatrix, CliError> {
    let d = (entries.len() as f64).sqrt().round() as usize;
    if d == 0 || d * d != entries.len() {
        return Err(CliError::Config(format!("{} matrix entries do not form a square matrix", entries.len())));
    }
    Ok(CMatrix::from_fn(d, d, |r, col| {
        let [re, im] = entries[r * d + col];
        c(re, im)
    }))
}

/// Contents of an ensemble file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    states: Vec<ComplexEntries>,
    #[serde(default)]
    prior: Option<Vec<f64>>,
    #[serde(default)]
    povm: Option<Vec<ComplexEntries>>,
}

pub(super) struct LoadedEnsemble {
    pub states: Vec<DensityOperator>,
    pub prior: Distribution,
    pub povm: Option<Povm>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!(
            "{}: line {} column {}, field `{}`: {}",
            path.display(),
            inner.line(),
            inner.column(),
            field,
            inner
        ))
    })
}

pub(super) fn required_file(file: &Option<PathBuf>) -> Result<&Path, CliError> {
    let path = file.as_deref().ok_or_else(|| CliError::Config("`file` is required for this source".into()))?;
    if !path.exists() {
        return Err(CliError::Config(format!("{} does not exist", path.display())));
    }
    Ok(path)
}

pub(super) fn load_ensemble(path: &Path) -> Result<LoadedEnsemble, CliError> {
    let file: EnsembleFile = read_json(path)?;
    let states = file
        .states
        .iter()
        .map(|m| Ok(DensityOperator::new(matrix_from_json(m)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let prior = match file.prior {
        Some(p) => Distribution::from_probs(p)?,
        None => Distribution::uniform(states.len())?,
    };
    let povm = match file.povm {
        Some(elements) => {
            let elements = elements.iter().map(|m| matrix_from_json(m)).collect::<Result<Vec<_>, _>>()?;
            let labels = (0..elements.len()).map(|k| k as f64).collect();
            Some(Povm::new(elements, labels)?)
        }
        None => None,
    };
    Ok(LoadedEnsemble { states, prior, povm })
}

/// A density matrix file: `{"matrix": [[re, im], ...]}`.
pub(super) fn load_state(path: &Path) -> Result<DensityOperator, CliError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct StateFile {
        matrix: ComplexEntries,
    }
    let file: StateFile = read_json(path)?;
    Ok(DensityOperator::new(matrix_from_json(&file.matrix)?)?)
}

pub(super) fn render_report(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(format!("report encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub(super) fn render_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let encode = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
    w.write_record(&table.header).map_err(encode)?;
    for row in &table.rows {
        w.write_record(row).map_err(encode)?;
    }
    w.into_inner().map_err(|e| CliError::Config(format!("csv encoding: {e}")))
}

/// Writes through a temporary file in the target directory and renames it into place.
pub(super) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    name: String,
    result: String,
    command: String,
}

pub(super) fn render_manifest() -> Result<String, CliError> {
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(MANIFEST).map_err(|e| CliError::Config(format!("bundled manifest: {e}")))?;
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!("{:width$}  {}\n{:width$}  $ holevo-limits {}\n", e.name, e.result, "", e.command));
    }
    Ok(out)
}
