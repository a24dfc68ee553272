//! Measure tables: one atom per line, coordinates then weight.

use std::path::Path;

use ballistic_core::DiscreteMeasure;

use crate::CliError;

const MASS_TOL: f64 = 1e-6;

/// Fields may be separated by whitespace, commas, semicolons or tabs. Lines
/// starting with `#` are comments; a first line that does not parse as
/// numbers is taken as a header.
pub fn parse_measure(text: &str) -> Result<DiscreteMeasure, CliError> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut width = None;
    let mut first = true;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',' || c == ';').filter(|s| !s.is_empty()).collect();
        let nums: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let nums = match nums {
            Ok(v) => v,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(_) => return Err(CliError::input(format!("line {}: not a number in `{line}`", k + 1))),
        };
        first = false;
        if nums.len() < 2 {
            return Err(CliError::input(format!("line {}: need coordinates and a weight", k + 1)));
        }
        if *width.get_or_insert(nums.len()) != nums.len() {
            return Err(CliError::input(format!("line {}: {} fields, expected {}", k + 1, nums.len(), width.unwrap())));
        }
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(CliError::input(format!("line {}: non-finite value", k + 1)));
        }
        let w = nums[nums.len() - 1];
        if w < 0.0 {
            return Err(CliError::input(format!("line {}: negative weight {w}", k + 1)));
        }
        points.push(nums[..nums.len() - 1].to_vec());
        weights.push(w);
    }
    if points.is_empty() {
        return Err(CliError::input("measure has no atoms"));
    }
    DiscreteMeasure::normalized(points, weights, MASS_TOL).map_err(|e| CliError::input(e.to_string()))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read measure {}: {e}", path.display())))?;
    parse_measure(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_and_header() {
        let m = parse_measure("x weight\n-1 0.5\n1, 0.5\n").unwrap();
        assert_eq!(m.points(), &[vec![-1.0], vec![1.0]]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let m = parse_measure("# plane\n0 0 0.25\n1 0 0.25\n0 1 0.5\n").unwrap();
        assert_eq!(m.dim(), 2);
    }

    #[test]
    fn renormalizes_near_unit_mass() {
        let m = parse_measure("0 0.3333333\n1 0.3333333\n2 0.3333333\n").unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejections() {
        assert!(parse_measure("0 0.5\n1 0.4\n").is_err());
        assert!(parse_measure("0 0.5\n1 2 0.5\n").is_err());
        assert!(parse_measure("0 1.5\n1 -0.5\n").is_err());
        assert!(parse_measure("x w\n0 1\nfoo 1\n").is_err());
        assert!(parse_measure("").is_err());
        assert!(parse_measure("3\n").is_err());
    }
}
