use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Formats a float with 17 significant digits so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Criterion {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        CsvTable {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, metadata: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub version: String,
    pub params_hash: String,
    pub seed: u64,
    pub runtime_seconds: f64,
    pub criteria: Vec<Criterion>,
    pub summary: Value,
    #[serde(skip)]
    pub tables: Vec<CsvTable>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("kind".into(), self.kind.clone()),
            ("version".into(), self.version.clone()),
            ("params_hash".into(), self.params_hash.clone()),
            ("seed".into(), self.seed.to_string()),
            ("bonds".into(), "unnormalized sum_i |ii>".into()),
        ]
    }

    /// Writes `<kind>[_<table>].csv` per table and `<kind>.json`; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let meta = self.metadata();
        let mut paths = Vec::new();
        for t in &self.tables {
            let file = if t.name.is_empty() {
                format!("{}.csv", self.kind)
            } else {
                format!("{}_{}.csv", self.kind, t.name)
            };
            let p = dir.join(file);
            std::fs::write(&p, t.render(&meta))?;
            paths.push(p);
        }
        let p = dir.join(format!("{}.json", self.kind));
        std::fs::write(&p, serde_json::to_string_pretty(self)? + "\n")?;
        paths.push(p);
        Ok(paths)
    }
}

pub fn version_string() -> String {
    match option_env!("SYMRTN_GIT_DESCRIBE") {
        Some(g) => format!("symrtn {} ({g})", env!("CARGO_PKG_VERSION")),
        None => format!("symrtn {}", env!("CARGO_PKG_VERSION")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new("", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        let s = t.render(&[("seed".into(), "3".into())]);
        assert_eq!(s, "# seed=3\na,b\n1,2\n");
    }
}
