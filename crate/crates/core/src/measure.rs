//! Finitely supported probability measures.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

const MASS_TOL: f64 = 1e-12;

impl DiscreteMeasure {
    /// Builds a measure, merging repeated points. Weights must be
    /// non-negative and sum to one within 1e-12; zero-weight atoms are kept.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points and {} weights",
                points.len(),
                weights.len()
            )));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidMeasure("points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total} differs from 1")));
        }
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        let mut ws: Vec<f64> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            match pts.iter().position(|q| *q == p) {
                Some(k) => ws[k] += w,
                None => {
                    pts.push(p);
                    ws.push(w);
                }
            }
        }
        Ok(Self { points: pts, weights: ws })
    }

    /// Rescales the weights to unit mass first. Fails when they do not sum
    /// to one within `tol`.
    pub fn normalized(points: Vec<Vec<f64>>, weights: Vec<f64>, tol: f64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !((total - 1.0).abs() <= tol) {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not within {tol} of 1")));
        }
        let ws: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // Push the last rounding residue onto the heaviest atom.
        let mut ws = ws;
        let resid = 1.0 - ws.iter().sum::<f64>();
        if let Some(k) = (0..ws.len()).max_by(|&a, &b| ws[a].total_cmp(&ws[b])) {
            ws[k] += resid;
        }
        Self::new(points, ws)
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        Self::new(vec![point], vec![1.0]).expect("a single atom is a valid measure")
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("no points".into()));
        }
        Self::normalized(points, vec![1.0 / n as f64; n], 1e-9)
    }

    /// One-dimensional convenience constructor.
    pub fn on_line(xs: &[f64], weights: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|x| vec![*x]).collect(), weights.to_vec())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Integral of `f` against the measure.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Image under `f`, with coinciding images merged.
    pub fn push_forward(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.points.iter().map(|p| f(p)).collect(), self.weights.clone())
    }

    /// Image under x -> -x.
    pub fn reflected(&self) -> Self {
        self.push_forward(|p| p.iter().map(|v| -v).collect()).expect("reflection keeps validity")
    }

    /// Drops atoms with zero weight.
    pub fn trimmed(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect();
        Self {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Atoms sorted by their first coordinate (one-dimensional use).
    pub fn sorted_1d(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.points.iter().map(|p| p[0]).zip(self.weights.iter().copied()).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    pub fn mean(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|k| self.integrate(|p| p[k])).collect()
    }
}
