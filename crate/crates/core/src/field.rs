//! Scalar functions on R^d given either in closed form or by samples.

use crate::grid::{self, GridFunction, SENTINEL};

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarField {
    /// `scale * |z|^2 / 2`; a negative scale gives a concave quadratic.
    Quadratic { scale: f64 },
    /// Sampled values, interpolated multilinearly and infinite outside the
    /// hull.
    Grid(GridFunction),
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Quadratic { scale: 0.0 }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            ScalarField::Quadratic { scale } => 0.5 * scale * norm2(z),
            ScalarField::Grid(g) => g.eval(z),
        }
    }

    /// Derivative used by solvers and integrators. Sampled fields use the
    /// interpolated nodal gradient; None where it is unavailable.
    pub fn gradient(&self, z: &[f64]) -> Option<Vec<f64>> {
        match self {
            ScalarField::Quadratic { scale } => Some(z.iter().map(|v| scale * v).collect()),
            ScalarField::Grid(g) => g.smooth_gradient(z),
        }
    }

    /// Upper bound on the second derivative, for step-size selection.
    pub fn curvature_bound(&self) -> f64 {
        match self {
            ScalarField::Quadratic { scale } => scale.abs(),
            ScalarField::Grid(g) => {
                let mut c: f64 = 0.0;
                for k in 0..g.dim() {
                    let ax = &g.axes()[k];
                    for idx in 0..g.len() {
                        let node = g.node_index(idx);
                        if node[k] == 0 || node[k] + 1 >= ax.len() {
                            continue;
                        }
                        let mut lo = node.clone();
                        let mut hi = node.clone();
                        lo[k] -= 1;
                        hi[k] += 1;
                        let gl = g.node_gradient(&lo)[k];
                        let gh = g.node_gradient(&hi)[k];
                        if gl.is_finite() && gh.is_finite() {
                            c = c.max((gh - gl).abs() / (ax[hi[k]] - ax[lo[k]]));
                        }
                    }
                }
                c
            }
        }
    }

    /// Whether the field is known to be convex: closed forms by sign,
    /// samples by their flag.
    pub fn is_convex_flagged(&self) -> bool {
        match self {
            ScalarField::Quadratic { scale } => *scale >= 0.0,
            ScalarField::Grid(g) => g.flag() == grid::Convexity::Convex,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ScalarField::Quadratic { .. } => None,
            ScalarField::Grid(g) => Some(g.dim()),
        }
    }

    /// Box containing the finite part of the field, if bounded.
    pub fn domain(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ScalarField::Quadratic { .. } => None,
            ScalarField::Grid(g) => Some(g.axes().iter().map(|a| (a[0], a[a.len() - 1])).collect()),
        }
    }

    /// Returns `value(z)` but maps the interpolation sentinel to SENTINEL.
    pub fn value_or_inf(&self, z: &[f64]) -> f64 {
        let v = self.value(z);
        if grid::is_sentinel(v) {
            SENTINEL
        } else {
            v
        }
    }
}

pub(crate) fn norm2(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
