//! Run manifests, CSV tables and run comparison.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance under which two numeric cells count as equal.
pub const CELL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A table of formatted cells; numbers use shortest round-trip formatting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::Io(e.error().to_string()))
    }
}

/// Formats a cell value.
pub fn cell(x: impl ToString) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub spec: serde_json::Value,
    pub software_version: String,
    pub wall_clock_seconds: f64,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Writes `<table>.csv` for every table and `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        for t in &self.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        let json = serde_json::to_string_pretty(self)?;
        fs::write(dir.join("manifest.json"), json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Schema(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffClass {
    /// Numeric, equal within the relative cell tolerance.
    WithinTolerance,
    Differs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiff {
    pub table: String,
    pub row: usize,
    pub column: String,
    pub left: String,
    pub right: String,
    /// `right - left` for numeric cells.
    pub delta: Option<f64>,
    pub class: DiffClass,
}

/// Cells of two runs that are not textually identical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub cells: Vec<CellDiff>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn differing(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.class == DiffClass::Differs)
            .count()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            "diff",
            &["table", "row", "column", "left", "right", "delta", "class"],
        );
        for c in &self.cells {
            t.push(vec![
                c.table.clone(),
                cell(c.row),
                c.column.clone(),
                c.left.clone(),
                c.right.clone(),
                c.delta.map(cell).unwrap_or_default(),
                format!("{:?}", c.class),
            ]);
        }
        t
    }
}

/// Per-cell comparison of the tables of two runs of the same command.
///
/// Specs, seeds and timings are not compared. Differing commands, table sets,
/// headers or row counts are schema mismatches.
pub fn compare_runs(m1: &RunManifest, m2: &RunManifest) -> Result<DiffReport, HarnessError> {
    if m1.command != m2.command {
        return Err(HarnessError::Schema(format!(
            "commands differ: {} vs {}",
            m1.command, m2.command
        )));
    }
    let names = |m: &RunManifest| m.tables.iter().map(|t| t.name.clone()).collect::<Vec<_>>();
    if names(m1) != names(m2) {
        return Err(HarnessError::Schema("table sets differ".into()));
    }
    let mut report = DiffReport::default();
    for (a, b) in m1.tables.iter().zip(&m2.tables) {
        if a.header != b.header {
            return Err(HarnessError::Schema(format!(
                "headers of {} differ",
                a.name
            )));
        }
        if a.rows.len() != b.rows.len() {
            return Err(HarnessError::Schema(format!(
                "{} has {} vs {} rows",
                a.name,
                a.rows.len(),
                b.rows.len()
            )));
        }
        for (i, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
            for ((x, y), col) in ra.iter().zip(rb).zip(&a.header) {
                if x == y {
                    continue;
                }
                let (class, delta) = match (x.parse::<f64>(), y.parse::<f64>()) {
                    (Ok(u), Ok(v)) => {
                        let d = v - u;
                        let class = if d.abs() <= CELL_TOL * u.abs().max(1.0) {
                            DiffClass::WithinTolerance
                        } else {
                            DiffClass::Differs
                        };
                        (class, Some(d))
                    }
                    _ => (DiffClass::Differs, None),
                };
                report.cells.push(CellDiff {
                    table: a.name.clone(),
                    row: i,
                    column: col.clone(),
                    left: x.clone(),
                    right: y.clone(),
                    delta,
                    class,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(rows: &[&str]) -> RunManifest {
        let mut t = Table::new("t", &["x"]);
        for r in rows {
            t.push(vec![r.to_string()]);
        }
        RunManifest {
            schema_version: SCHEMA_VERSION,
            command: "interval".into(),
            spec: serde_json::Value::Null,
            software_version: "0".into(),
            wall_clock_seconds: 0.0,
            checks: vec![],
            tables: vec![t],
        }
    }

    #[test]
    fn classifies_cells() {
        let d = compare_runs(
            &manifest(&["1", "2", "a"]),
            &manifest(&["1.0000000000001", "3", "b"]),
        )
        .unwrap();
        let classes: Vec<_> = d.cells.iter().map(|c| c.class).collect();
        assert_eq!(
            classes,
            [
                DiffClass::WithinTolerance,
                DiffClass::Differs,
                DiffClass::Differs
            ]
        );
        assert_eq!(d.cells[1].delta, Some(1.0));
        assert_eq!(d.differing(), 2);
    }

    #[test]
    fn row_count_mismatch_is_schema_error() {
        let e = compare_runs(&manifest(&["1"]), &manifest(&["1", "2"]));
        assert!(matches!(e, Err(HarnessError::Schema(_))));
    }

    #[test]
    fn csv_quotes_cells_with_commas() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec!["x,y".into(), cell(0.1)]);
        assert_eq!(
            String::from_utf8(t.to_csv().unwrap()).unwrap(),
            "a,b\n\"x,y\",0.1\n"
        );
    }

    #[test]
    fn read_rejects_other_schema_versions() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(&["1"]);
        m.schema_version = SCHEMA_VERSION + 1;
        m.write(dir.path()).unwrap();
        assert!(matches!(
            RunManifest::read(&dir.path().join("manifest.json")),
            Err(HarnessError::Schema(_))
        ));
    }
}
