//! CSV tables with a trailing comment block describing the scenario.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::config::ScenarioConfig;
use crate::error::Result;

/// Header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>, rows: Vec<Vec<String>>) -> Self {
        ResultTable {
            header: header.into_iter().map(Into::into).collect(),
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Renders the table. The timestamp line is omitted when `timestamp` is `None`,
/// which makes the output a pure function of the inputs.
pub fn render_csv(table: &ResultTable, scenario: &ScenarioConfig, timestamp: Option<u64>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    let mut out = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    writeln!(out, "# scenario")?;
    for line in scenario.to_config_string().lines() {
        if line.is_empty() {
            writeln!(out, "#")?;
        } else {
            writeln!(out, "# {line}")?;
        }
    }
    if let Some(ts) = timestamp {
        writeln!(out, "# generated_unix_seconds = {ts}")?;
    }
    Ok(out)
}

/// Writes next to `path` and renames into place so readers never see a partial file.
pub fn write_csv_atomic(path: &Path, table: &ResultTable, scenario: &ScenarioConfig, timestamp: bool) -> Result<()> {
    let ts = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let bytes = render_csv(table, scenario, ts)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
