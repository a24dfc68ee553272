//! Plain-text reports with certificate blocks, plus delimited tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ballistic_core::interpolation::Certificate;

use crate::CliError;

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    command: String,
    body: String,
    failures: usize,
    tables: Vec<Table>,
}

/// Shortest round-trip form, always with a decimal point or exponent.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn point(p: &[f64]) -> String {
    p.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), body: format!("command: {command}\n"), failures: 0, tables: Vec::new() }
    }

    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.body, "{key}: {value}");
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.line(key, num(v));
    }

    pub fn certificate(&mut self, name: &str, c: &Certificate) {
        if !c.pass {
            self.failures += 1;
        }
        let _ = write!(
            self.body,
            "\ncertificate: {name}\n  lhs: {}\n  rhs: {}\n  |lhs-rhs|: {}\n  tolerance: {}\n  result: {}\n",
            num(c.lhs),
            num(c.rhs),
            num(c.difference),
            num(c.tolerance),
            if c.pass { "pass" } else { "fail" }
        );
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn body(&self) -> String {
        let mut s = self.body.clone();
        let _ = writeln!(s, "\nsummary: {}", if self.failures == 0 { "all certificates pass".to_string() } else { format!("{} certificate(s) failed", self.failures) });
        s
    }

    /// Writes `<command>.txt` and one `<command>_<table>.csv` per table;
    /// returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut out = Vec::new();
        let path = dir.join(format!("{}.txt", self.command));
        let text = format!("# ballistic {} report, generated at unix time {stamp}\n{}", self.command, self.body());
        std::fs::write(&path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        out.push(path);
        for t in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.command, t.name));
            std::fs::write(&path, t.render()).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
            out.push(path);
        }
        Ok(out)
    }
}
