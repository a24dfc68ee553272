//! Browser bindings for three one-dimensional operations: an exact
//! transport plan, the ballistic interpolation through an intermediate
//! grid, and a sampled Legendre conjugate. Results come back as flat
//! `Float64Array`s; `www/index.html` draws them.

use ballistic_core::costs::CostSpec;
use ballistic_core::grid::{axis_with_spacing, legendre_conjugate, linspace};
use ballistic_core::interpolation::interpolate_min;
use ballistic_core::ot::{bilinear_cost, solve, Direction};
use ballistic_core::{Convexity, DiscreteMeasure, GridFunction};
use wasm_bindgen::prelude::*;

fn measure(flat: &[f64]) -> Result<DiscreteMeasure, String> {
    if flat.is_empty() || !flat.len().is_multiple_of(2) {
        return Err("expected position, weight pairs".into());
    }
    let points = flat.chunks_exact(2).map(|c| vec![c[0]]).collect();
    let weights = flat.chunks_exact(2).map(|c| c[1]).collect();
    DiscreteMeasure::normalized(points, weights, 1e-6).map_err(|e| e.to_string())
}

/// `[value, (source, target, mass)...]` for the bilinear cost.
pub fn plan(mu: &[f64], nu: &[f64], maximize: bool) -> Result<Vec<f64>, String> {
    let (mu, nu) = (measure(mu)?, measure(nu)?);
    let cost = bilinear_cost(&mu, &nu).map_err(|e| e.to_string())?;
    let dir = if maximize { Direction::Max } else { Direction::Min };
    let r = solve(&cost, &mu, &nu, dir).map_err(|e| e.to_string())?;
    let mut out = vec![r.value];
    for (i, j, m) in r.plan.support() {
        out.extend([mu.points()[i][0], nu.points()[j][0], m]);
    }
    Ok(out)
}

/// `[value, exact value, (covector, intermediate, target, mass)...]` for
/// free motion with the given mass and horizon.
pub fn interpolation(
    mu: &[f64],
    nu: &[f64],
    mass: f64,
    horizon: f64,
    lo: f64,
    hi: f64,
    spacing: f64,
) -> Result<Vec<f64>, String> {
    let (mu, nu) = (measure(mu)?, measure(nu)?);
    if !(lo < hi && spacing > 0.0 && (hi - lo) / spacing <= 20_000.0) {
        return Err("window needs lo < hi and at most 20000 nodes".into());
    }
    let spec = CostSpec::quadratic(mass, horizon).map_err(|e| e.to_string())?;
    let r = interpolate_min(&spec, &mu, &nu, &[axis_with_spacing(lo, hi, spacing)]).map_err(|e| e.to_string())?;
    let mut out = vec![r.value, r.ballistic_value];
    for p in &r.pairs {
        out.extend([mu.points()[p.source][0], p.point[0], nu.points()[p.target][0], p.mass]);
    }
    Ok(out)
}

/// Samples `|x|^q / q` on `n` nodes of `[lo, hi]`; returns the samples
/// followed by the conjugate on the same nodes.
pub fn conjugate(q: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(q > 1.0) || !(lo < hi) || !(2..=4096).contains(&n) {
        return Err("need q > 1, lo < hi and 2 <= n <= 4096".into());
    }
    let axis = linspace(lo, hi, n);
    let f = GridFunction::from_fn(vec![axis.clone()], Convexity::Convex, |x| x[0].abs().powf(q) / q)
        .map_err(|e| e.to_string())?;
    let g = legendre_conjugate(&f, &[axis]).map_err(|e| e.to_string())?;
    Ok(f.values().iter().chain(g.values()).copied().collect())
}

#[wasm_bindgen]
pub fn transport_plan(mu: &[f64], nu: &[f64], maximize: bool) -> Result<Vec<f64>, JsError> {
    plan(mu, nu, maximize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ballistic_interpolation(
    mu: &[f64],
    nu: &[f64],
    mass: f64,
    horizon: f64,
    lo: f64,
    hi: f64,
    spacing: f64,
) -> Result<Vec<f64>, JsError> {
    interpolation(mu, nu, mass, horizon, lo, hi, spacing).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn power_conjugate(q: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    conjugate(q, lo, hi, n).map_err(|e| JsError::new(&e))
}
