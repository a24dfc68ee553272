//! Sectioned `key = value` problem files. See CONFIG.md for the grammar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Clone, Debug, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    base: PathBuf,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| is_ident(n))
                    .ok_or_else(|| CliError::input(format!("line {line}: malformed section header `{body}`")))?;
                if sections.contains_key(name) {
                    return Err(CliError::input(format!("line {line}: section [{name}] appears twice")));
                }
                sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("line {line}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !is_ident(key) {
                return Err(CliError::input(format!("line {line}: invalid key `{key}`")));
            }
            let section = current
                .as_ref()
                .ok_or_else(|| CliError::input(format!("line {line}: `{key}` outside any section")))?;
            let map = sections.get_mut(section).expect("section registered");
            if map.insert(key.to_string(), Entry { value: value.to_string(), line }).is_some() {
                return Err(CliError::input(format!("line {line}: duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(Self { sections, base: base.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Rejects sections and keys outside the schema.
    pub fn check_schema(&self, schema: &[(&str, &[&str])]) -> Result<(), CliError> {
        for (name, keys) in &self.sections {
            let allowed = schema
                .iter()
                .find(|(s, _)| s == name)
                .ok_or_else(|| CliError::input(format!("unknown section [{name}]")))?
                .1;
            for (key, e) in keys {
                if !allowed.contains(&key.as_str()) {
                    return Err(CliError::input(format!("line {}: unknown key `{key}` in [{name}]", e.line)));
                }
            }
        }
        Ok(())
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    pub fn require_str(&self, section: &str, key: &str) -> Result<&str, CliError> {
        self.str(section, key).ok_or_else(|| CliError::input(format!("missing `{key}` in [{section}]")))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.entry(section, key).map(|e| parse_f64(&e.value, e.line, key)).transpose()
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(section, key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, CliError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| CliError::input(format!("line {}: `{key}` must be a non-negative integer", e.line))),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<Option<u64>, CliError> {
        self.entry(section, key)
            .map(|e| {
                e.value
                    .parse()
                    .map_err(|_| CliError::input(format!("line {}: `{key}` must be a non-negative integer", e.line)))
            })
            .transpose()
    }

    pub fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.entry(section, key)
            .map(|e| e.value.split(',').map(|t| parse_f64(t.trim(), e.line, key)).collect())
            .transpose()
    }

    /// A `lo, hi` pair with lo < hi.
    pub fn range(&self, section: &str, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.list(section, key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 && v[0] < v[1] => Ok(Some((v[0], v[1]))),
            Some(_) => Err(CliError::input(format!("`{key}` in [{section}] must be `lo, hi` with lo < hi"))),
        }
    }

    /// A path value, resolved against the directory of the config file.
    pub fn path(&self, section: &str, key: &str) -> Result<PathBuf, CliError> {
        let p = Path::new(self.require_str(section, key)?);
        Ok(if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(k) => &line[..k],
        None => line,
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_f64(s: &str, line: usize, key: &str) -> Result<f64, CliError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(format!("line {line}: `{key}` expects a finite number, got `{s}`"))),
    }
}
