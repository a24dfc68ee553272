//! Builds core objects from the `[lagrangian]` and `[measures]` sections.

use ballistic_core::costs::CostSpec;
use ballistic_core::field::ScalarField;
use ballistic_core::grid::{axis_with_spacing, Convexity, GridFunction};
use ballistic_core::lagrangian::LagrangianSpec;
use ballistic_core::DiscreteMeasure;

use crate::config::Config;
use crate::measure_file::read_measure;
use crate::CliError;

pub const LAGRANGIAN_KEYS: &[&str] =
    &["kind", "mass", "kinetic", "kinetic_scale", "kinetic_window", "kinetic_spacing", "potential", "potential_scale", "horizon"];
pub const MEASURE_KEYS: &[&str] = &["source", "target"];

fn kinetic(c: &Config) -> Result<ScalarField, CliError> {
    let s = "lagrangian";
    match c.str(s, "kinetic").unwrap_or("quadratic") {
        "quadratic" => {
            let scale = c.f64_or(s, "kinetic_scale", 1.0)?;
            if !(scale > 0.0) {
                return Err(CliError::input("kinetic_scale must be positive"));
            }
            Ok(ScalarField::Quadratic { scale })
        }
        "abs" => {
            let (lo, hi) = c.range(s, "kinetic_window")?.unwrap_or((-4.0, 4.0));
            let h = c.f64_or(s, "kinetic_spacing", 0.01)?;
            if !(h > 0.0) {
                return Err(CliError::input("kinetic_spacing must be positive"));
            }
            let g = GridFunction::from_fn(vec![axis_with_spacing(lo, hi, h)], Convexity::Convex, |p| p[0].abs())?;
            Ok(ScalarField::Grid(g))
        }
        other => Err(CliError::input(format!("unknown kinetic term `{other}` (quadratic, abs)"))),
    }
}

pub fn lagrangian(c: &Config) -> Result<LagrangianSpec, CliError> {
    let s = "lagrangian";
    let l = match c.require_str(s, "kind")? {
        "quadratic" => LagrangianSpec::quadratic(c.f64_or(s, "mass", 1.0)?)?,
        "state-independent" => LagrangianSpec::state_independent(kinetic(c)?)?,
        "separable" => {
            let u = match c.str(s, "potential").unwrap_or("quadratic") {
                "quadratic" => ScalarField::Quadratic { scale: c.f64_or(s, "potential_scale", 1.0)? },
                "zero" => ScalarField::zero(),
                other => return Err(CliError::input(format!("unknown potential `{other}` (quadratic, zero)"))),
            };
            LagrangianSpec::separable(kinetic(c)?, u)?
        }
        other => return Err(CliError::input(format!("unknown lagrangian kind `{other}`"))),
    };
    Ok(l)
}

pub fn cost_spec(c: &Config) -> Result<CostSpec, CliError> {
    let t = c.f64_or("lagrangian", "horizon", 1.0)?;
    Ok(CostSpec::new(lagrangian(c)?, t)?)
}

pub fn measures(c: &Config) -> Result<(DiscreteMeasure, DiscreteMeasure), CliError> {
    let a = read_measure(&c.path("measures", "source")?)?;
    let b = read_measure(&c.path("measures", "target")?)?;
    if a.dim() != b.dim() {
        return Err(CliError::input(format!("source has dimension {}, target has {}", a.dim(), b.dim())));
    }
    Ok((a, b))
}

/// Cubic window axes in the measures' dimension.
pub fn window_axes(range: (f64, f64), spacing: f64, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    if !(spacing > 0.0) {
        return Err(CliError::input("grid spacing must be positive"));
    }
    if dim > 2 {
        return Err(CliError::input(format!("grids are available in one or two dimensions, not {dim}")));
    }
    Ok(vec![axis_with_spacing(range.0, range.1, spacing); dim])
}
