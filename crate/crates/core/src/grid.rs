//! Sampled scalar functions on rectangular grids in one or two dimensions,
//! with Legendre-Fenchel conjugates, convexity tests and finite-difference
//! gradients.
//!
//! Values at or beyond [`SENTINEL`] in magnitude stand for an infinite value.
//! They absorb under addition and never win an argmin or argmax.

use crate::error::{Error, Result};

/// Stand-in for +infinity (or -infinity when negated).
pub const SENTINEL: f64 = 1e300;

/// True when `v` represents an infinite value of either sign.
#[inline]
pub fn is_sentinel(v: f64) -> bool {
    v.abs() >= 0.5 * SENTINEL
}

/// Sentinel-absorbing sum.
#[inline]
pub fn add(a: f64, b: f64) -> f64 {
    if is_sentinel(a) {
        a
    } else if is_sentinel(b) {
        b
    } else {
        a + b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Concave,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
    flag: Convexity,
}

/// Evenly spaced samples from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two samples");
    let h = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + h * i as f64 })
        .collect()
}

/// Samples from `lo` to `hi` with the given spacing. `hi` is rounded to the
/// nearest whole number of steps.
pub fn axis_with_spacing(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    assert!(spacing > 0.0 && hi > lo);
    let steps = ((hi - lo) / spacing).round().max(1.0) as usize;
    (0..=steps).map(|i| lo + spacing * i as f64).collect()
}

fn check_axes(axes: &[Vec<f64>]) -> Result<()> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidGrid(format!("dimension {} not in 1..=2", axes.len())));
    }
    for (k, ax) in axes.iter().enumerate() {
        if ax.len() < 2 {
            return Err(Error::InvalidGrid(format!("axis {k} has fewer than 2 samples")));
        }
        if ax.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("axis {k} has a non-finite sample")));
        }
        if ax.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("axis {k} is not strictly increasing")));
        }
    }
    Ok(())
}

/// Index of the cell `[ax[i], ax[i+1]]` containing `x`, or None outside.
fn locate(ax: &[f64], x: f64) -> Option<usize> {
    let n = ax.len();
    let tol = 1e-12 * (ax[n - 1] - ax[0]).abs().max(1.0);
    if x < ax[0] - tol || x > ax[n - 1] + tol {
        return None;
    }
    let p = ax.partition_point(|&a| a <= x);
    Some(p.saturating_sub(1).min(n - 2))
}

impl GridFunction {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>, flag: Convexity) -> Result<Self> {
        check_axes(&axes)?;
        let n: usize = axes.iter().map(|a| a.len()).product();
        if values.len() != n {
            return Err(Error::InvalidGrid(format!(
                "expected {n} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidGrid("NaN value".into()));
        }
        let values = values
            .into_iter()
            .map(|v| if is_sentinel(v) { SENTINEL.copysign(v) } else { v })
            .collect();
        Ok(Self { axes, values, flag })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(
        axes: Vec<Vec<f64>>,
        flag: Convexity,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        check_axes(&axes)?;
        let n: usize = axes.iter().map(|a| a.len()).product();
        let mut values = Vec::with_capacity(n);
        let mut p = vec![0.0; axes.len()];
        for idx in 0..n {
            Self::fill_point(&axes, idx, &mut p);
            values.push(f(&p));
        }
        Self::new(axes, values, flag)
    }

    fn fill_point(axes: &[Vec<f64>], idx: usize, p: &mut [f64]) {
        if axes.len() == 1 {
            p[0] = axes[0][idx];
        } else {
            let n1 = axes[1].len();
            p[0] = axes[0][idx / n1];
            p[1] = axes[1][idx % n1];
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flag(&self) -> Convexity {
        self.flag
    }

    pub fn with_flag(mut self, flag: Convexity) -> Self {
        self.flag = flag;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of node `idx` in flat (row-major) order.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        Self::fill_point(&self.axes, idx, &mut p);
        p
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn flat(&self, i: &[usize]) -> usize {
        if self.dim() == 1 {
            i[0]
        } else {
            i[0] * self.axes[1].len() + i[1]
        }
    }

    /// Pointwise negation; the flag flips between convex and concave.
    pub fn neg(&self) -> Self {
        let flag = match self.flag {
            Convexity::Convex => Convexity::Concave,
            Convexity::Concave => Convexity::Convex,
            Convexity::Unknown => Convexity::Unknown,
        };
        Self {
            axes: self.axes.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            flag,
        }
    }

    /// Same grid, values mapped through `f`. The flag is reset to unknown.
    pub fn map(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let values = (0..self.len())
            .map(|i| f(&self.point(i), self.values[i]))
            .collect();
        Self::new(self.axes.clone(), values, Convexity::Unknown)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.axes.iter().zip(x).all(|(a, &xi)| locate(a, xi).is_some())
    }

    /// Multilinear interpolation. Outside the hull, or where a surrounding
    /// node is infinite, the result is the sentinel of that node's sign
    /// (positive outside the hull).
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let mut cells = [0usize; 2];
        let mut ts = [0.0f64; 2];
        for (k, ax) in self.axes.iter().enumerate() {
            match locate(ax, x[k]) {
                Some(c) => {
                    cells[k] = c;
                    ts[k] = ((x[k] - ax[c]) / (ax[c + 1] - ax[c])).clamp(0.0, 1.0);
                }
                None => return SENTINEL,
            }
        }
        if self.dim() == 1 {
            let (a, b) = (self.values[cells[0]], self.values[cells[0] + 1]);
            return lerp(a, b, ts[0]);
        }
        let n1 = self.axes[1].len();
        let at = |i: usize, j: usize| self.values[i * n1 + j];
        let (i, j) = (cells[0], cells[1]);
        let lo = lerp(at(i, j), at(i, j + 1), ts[1]);
        let hi = lerp(at(i + 1, j), at(i + 1, j + 1), ts[1]);
        lerp(lo, hi, ts[0])
    }

    /// Finite-difference gradient at node `i` along each axis: central in
    /// the interior, one-sided on the boundary.
    pub fn node_gradient(&self, node: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|k| {
                let ax = &self.axes[k];
                let n = ax.len();
                let mut lo = node.to_vec();
                let mut hi = node.to_vec();
                if node[k] == 0 {
                    hi[k] = 1;
                } else if node[k] == n - 1 {
                    lo[k] = n - 2;
                } else {
                    lo[k] -= 1;
                    hi[k] += 1;
                }
                let (flo, fhi) = (self.values[self.flat(&lo)], self.values[self.flat(&hi)]);
                if is_sentinel(flo) || is_sentinel(fhi) {
                    f64::NAN
                } else {
                    (fhi - flo) / (ax[hi[k]] - ax[lo[k]])
                }
            })
            .collect()
    }

    /// Multilinear interpolation of the nodal finite-difference gradients.
    /// For convex samples this is a monotone, continuous vector field, which
    /// makes it a usable derivative inside iterative solvers and integrators.
    /// Returns None outside the hull or next to infinite samples.
    pub fn smooth_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim();
        let mut cells = [0usize; 2];
        let mut ts = [0.0f64; 2];
        for (k, ax) in self.axes.iter().enumerate() {
            let c = locate(ax, x[k])?;
            cells[k] = c;
            ts[k] = ((x[k] - ax[c]) / (ax[c + 1] - ax[c])).clamp(0.0, 1.0);
        }
        let mut out = vec![0.0; d];
        let corners: &[[usize; 2]] = if d == 1 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [0, 1], [1, 0], [1, 1]]
        };
        for c in corners {
            let mut w = 1.0;
            let mut node = vec![0usize; d];
            for k in 0..d {
                node[k] = cells[k] + c[k];
                w *= if c[k] == 1 { ts[k] } else { 1.0 - ts[k] };
            }
            if w == 0.0 {
                continue;
            }
            let g = self.node_gradient(&node);
            for k in 0..d {
                out[k] += w * g[k];
            }
        }
        if out.iter().all(|v| v.is_finite()) {
            Some(out)
        } else {
            None
        }
    }

    /// Index and value of the smallest finite sample.
    pub fn argmin(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !is_sentinel(**v))
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, bv)) if bv <= v => best,
                _ => Some((i, v)),
            })
    }

    /// Largest spacing along any axis.
    pub fn resolution(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Largest finite-difference slope magnitude between neighbouring finite
    /// samples.
    pub fn lipschitz_bound(&self) -> f64 {
        let mut lip: f64 = 0.0;
        for idx in 0..self.len() {
            let v = self.values[idx];
            if is_sentinel(v) {
                continue;
            }
            let node = self.node_index(idx);
            for k in 0..self.dim() {
                if node[k] + 1 < self.axes[k].len() {
                    let mut nb = node.clone();
                    nb[k] += 1;
                    let w = self.values[self.flat(&nb)];
                    if !is_sentinel(w) {
                        let h = self.axes[k][nb[k]] - self.axes[k][node[k]];
                        lip = lip.max((w - v).abs() / h);
                    }
                }
            }
        }
        lip
    }

    pub fn node_index(&self, idx: usize) -> Vec<usize> {
        if self.dim() == 1 {
            vec![idx]
        } else {
            let n1 = self.axes[1].len();
            vec![idx / n1, idx % n1]
        }
    }

    /// Restricts the samples to another grid by interpolation.
    pub fn resample(&self, axes: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_fn(axes, self.flag, |p| self.eval(p))
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        return a;
    }
    if t == 1.0 {
        return b;
    }
    if is_sentinel(a) {
        return a;
    }
    if is_sentinel(b) {
        return b;
    }
    a + t * (b - a)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// f*(q) = max over finite nodes x of <q, x> - f(x), evaluated at the single
/// covector `q`. Returns the value and the maximizing node.
pub fn conjugate_at(f: &GridFunction, q: &[f64]) -> Result<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    let mut p = vec![0.0; f.dim()];
    for (idx, &v) in f.values.iter().enumerate() {
        if is_sentinel(v) {
            continue;
        }
        GridFunction::fill_point(&f.axes, idx, &mut p);
        let s = dot(q, &p) - v;
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, idx));
        }
    }
    best.ok_or(Error::EmptyDomain)
}

/// Discrete Legendre-Fenchel transform: the max over the nodes of `f` of
/// <q, x> - f(x), sampled on `dual_axes`. One-dimensional inputs walk the
/// lower convex hull of the samples; in two dimensions the max is taken row
/// by row. Both agree with `legendre_conjugate_scan` up to rounding. The
/// result is flagged convex.
pub fn legendre_conjugate(f: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridFunction> {
    if f.dim() == 1 && dual_axes.len() == 1 && !f.values.iter().any(|v| is_sentinel(*v) && *v < 0.0) {
        check_axes(dual_axes)?;
        let pts: Vec<(f64, f64)> =
            f.axes[0].iter().zip(&f.values).filter(|(_, v)| !is_sentinel(**v)).map(|(x, v)| (*x, *v)).collect();
        if pts.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let values = conjugate_1d(&pts, &dual_axes[0]);
        return GridFunction::new(dual_axes.to_vec(), values, Convexity::Convex);
    }
    if f.dim() != 2 {
        return legendre_conjugate_scan(f, dual_axes);
    }
    check_axes(dual_axes)?;
    if dual_axes.len() != 2 {
        return Err(Error::InvalidGrid("dual axes dimension differs".into()));
    }
    if f.values.iter().all(|v| is_sentinel(*v) && *v > 0.0) {
        return Err(Error::EmptyDomain);
    }
    let n: usize = dual_axes[0].len() * dual_axes[1].len();
    if f.values.iter().all(|v| is_sentinel(*v)) {
        return GridFunction::new(dual_axes.to_vec(), vec![SENTINEL; n], Convexity::Convex);
    }
    if f.values.iter().any(|v| is_sentinel(*v) && *v < 0.0) {
        return GridFunction::new(dual_axes.to_vec(), vec![SENTINEL; n], Convexity::Convex);
    }
    let (a0, a1) = (&f.axes[0], &f.axes[1]);
    let (q0, q1) = (&dual_axes[0], &dual_axes[1]);
    // rows[i][l] = max_j q1[l] x1_j - f(i, j), or None for an empty row
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    for (i, &x0) in a0.iter().enumerate() {
        let row = &f.values[i * a1.len()..(i + 1) * a1.len()];
        if row.iter().all(|v| is_sentinel(*v)) {
            continue;
        }
        let r: Vec<f64> = q1
            .iter()
            .map(|&q| {
                let mut best = f64::NEG_INFINITY;
                for (j, &v) in row.iter().enumerate() {
                    if !is_sentinel(v) {
                        best = best.max(q * a1[j] - v);
                    }
                }
                best
            })
            .collect();
        rows.push((x0, r));
    }
    let mut values = Vec::with_capacity(n);
    for &p in q0 {
        for l in 0..q1.len() {
            let mut best = f64::NEG_INFINITY;
            for (x0, r) in &rows {
                best = best.max(p * x0 + r[l]);
            }
            values.push(best);
        }
    }
    GridFunction::new(dual_axes.to_vec(), values, Convexity::Convex)
}

/// max_i q x_i - v_i for ascending `xs` and ascending `qs`: the maximizer
/// is a lower-hull vertex and moves right as q grows.
fn conjugate_1d(pts: &[(f64, f64)], qs: &[f64]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord from a to p
            if (b.1 - a.1) * (p.0 - a.0) >= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut k = 0;
    qs.iter()
        .map(|&q| {
            while k + 1 < hull.len() && q * hull[k + 1].0 - hull[k + 1].1 >= q * hull[k].0 - hull[k].1 {
                k += 1;
            }
            q * hull[k].0 - hull[k].1
        })
        .collect()
}

/// Reference transform by exhaustive scan over the nodes of `f`.
pub fn legendre_conjugate_scan(f: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridFunction> {
    check_axes(dual_axes)?;
    if dual_axes.len() != f.dim() {
        return Err(Error::InvalidGrid("dual axes dimension differs".into()));
    }
    if f.values.iter().all(|v| is_sentinel(*v) && *v > 0.0) {
        return Err(Error::EmptyDomain);
    }
    let d = f.dim();
    let mut xs: Vec<f64> = Vec::new();
    let mut vs: Vec<f64> = Vec::new();
    for i in 0..f.len() {
        if !is_sentinel(f.values[i]) {
            xs.extend(f.point(i));
            vs.push(f.values[i]);
        }
    }
    if vs.is_empty() {
        // Only -inf samples: the conjugate is +inf everywhere.
        let n: usize = dual_axes.iter().map(|a| a.len()).product();
        return GridFunction::new(dual_axes.to_vec(), vec![SENTINEL; n], Convexity::Convex);
    }
    let has_neg_inf = f.values.iter().any(|v| is_sentinel(*v) && *v < 0.0);
    GridFunction::from_fn(dual_axes.to_vec(), Convexity::Convex, |q| {
        if has_neg_inf {
            return SENTINEL;
        }
        let mut best = f64::NEG_INFINITY;
        for (x, v) in xs.chunks_exact(d).zip(&vs) {
            best = best.max(dot(q, x) - v);
        }
        best
    })
}

/// Concave transform g~(v) = min over nodes x of <v, x> - g(x), computed as
/// -(-g)*(-v) so that the identity holds to the last bit.
pub fn concave_conjugate(g: &GridFunction, dual_axes: &[Vec<f64>]) -> Result<GridFunction> {
    let neg_axes: Vec<Vec<f64>> = dual_axes
        .iter()
        .map(|a| a.iter().rev().map(|x| -x).collect())
        .collect();
    let conj = legendre_conjugate(&g.neg(), &neg_axes)?;
    // conj is sampled at -v in reversed order; undo both.
    let values = reverse_order(&conj, dual_axes)
        .into_iter()
        .map(|v| -v)
        .collect();
    GridFunction::new(dual_axes.to_vec(), values, Convexity::Concave)
}

fn reverse_order(f: &GridFunction, axes: &[Vec<f64>]) -> Vec<f64> {
    let v = f.values();
    if axes.len() == 1 {
        v.iter().rev().copied().collect()
    } else {
        let (n0, n1) = (axes[0].len(), axes[1].len());
        let mut out = vec![0.0; v.len()];
        for i in 0..n0 {
            for j in 0..n1 {
                out[i * n1 + j] = v[(n0 - 1 - i) * n1 + (n1 - 1 - j)];
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Largest amount by which a sample sits above the chord of its
    /// neighbours along a grid line (0 when none does).
    pub worst_violation: f64,
    pub witness: Option<Vec<f64>>,
}

/// Tests discrete convexity along every axis line and, where the three
/// points are collinear, along both grid diagonals.
pub fn is_convex(f: &GridFunction, tol: f64) -> ConvexityReport {
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut check = |a: usize, b: usize, c: usize, ta: f64, tb: f64, tc: f64, worst: &mut f64| {
        let (fa, fb, fc) = (f.values[a], f.values[b], f.values[c]);
        let gap = if is_sentinel(fb) && fb > 0.0 {
            if is_sentinel(fa) || is_sentinel(fc) {
                return;
            }
            f64::INFINITY
        } else if is_sentinel(fa) || is_sentinel(fc) {
            return;
        } else {
            let chord = ((tc - tb) * fa + (tb - ta) * fc) / (tc - ta);
            fb - chord
        };
        if gap > *worst {
            *worst = gap;
            witness = Some(f.point(b));
        }
    };
    let dims: Vec<usize> = f.axes.iter().map(|a| a.len()).collect();
    if f.dim() == 1 {
        let ax = &f.axes[0];
        for i in 1..dims[0] - 1 {
            check(i - 1, i, i + 1, ax[i - 1], ax[i], ax[i + 1], &mut worst);
        }
    } else {
        let (n0, n1) = (dims[0], dims[1]);
        let (a0, a1) = (&f.axes[0], &f.axes[1]);
        let id = |i: usize, j: usize| i * n1 + j;
        for i in 0..n0 {
            for j in 0..n1 {
                if i > 0 && i + 1 < n0 {
                    check(id(i - 1, j), id(i, j), id(i + 1, j), a0[i - 1], a0[i], a0[i + 1], &mut worst);
                }
                if j > 0 && j + 1 < n1 {
                    check(id(i, j - 1), id(i, j), id(i, j + 1), a1[j - 1], a1[j], a1[j + 1], &mut worst);
                }
                if i > 0 && i + 1 < n0 && j > 0 && j + 1 < n1 {
                    let (dx0, dx1) = (a0[i] - a0[i - 1], a0[i + 1] - a0[i]);
                    let (dy0, dy1) = (a1[j] - a1[j - 1], a1[j + 1] - a1[j]);
                    // Diagonal triples are only collinear when the spacing
                    // ratios agree.
                    if (dx0 * dy1 - dx1 * dy0).abs() <= 1e-12 * (dx0 * dy1).abs() {
                        let (s0, s1) = ((dx0 * dx0 + dy0 * dy0).sqrt(), (dx1 * dx1 + dy1 * dy1).sqrt());
                        check(id(i - 1, j - 1), id(i, j), id(i + 1, j + 1), 0.0, s0, s0 + s1, &mut worst);
                    }
                    let (dy0b, dy1b) = (a1[j + 1] - a1[j], a1[j] - a1[j - 1]);
                    if (dx0 * dy1b - dx1 * dy0b).abs() <= 1e-12 * (dx0 * dy1b).abs() {
                        let (s0, s1) = ((dx0 * dx0 + dy0b * dy0b).sqrt(), (dx1 * dx1 + dy1b * dy1b).sqrt());
                        check(id(i - 1, j + 1), id(i, j), id(i + 1, j - 1), 0.0, s0, s0 + s1, &mut worst);
                    }
                }
            }
        }
    }
    ConvexityReport {
        convex: worst <= tol,
        worst_violation: worst,
        witness,
    }
}

/// Finite-difference gradient at an arbitrary point of the hull: central
/// differences with the local cell width, one-sided where a step would
/// leave the grid.
pub fn grid_gradient(f: &GridFunction, x: &[f64]) -> Result<Vec<f64>> {
    if !f.contains(x) {
        return Err(Error::OutOfDomain(x.to_vec()));
    }
    let mut g = Vec::with_capacity(f.dim());
    for k in 0..f.dim() {
        let ax = &f.axes[k];
        let c = locate(ax, x[k]).expect("inside hull");
        // At a node use the narrower neighbouring cell so the stencil stays
        // on nodes for uniform grids.
        let at_node = (x[k] - ax[c]).abs() <= 1e-12 * (1.0 + ax[c].abs());
        let h = if at_node && c > 0 {
            (ax[c + 1] - ax[c]).min(ax[c] - ax[c - 1])
        } else {
            ax[c + 1] - ax[c]
        };
        let (lo_ax, hi_ax) = (ax[0], ax[ax.len() - 1]);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        let (a, b) = if x[k] - h < lo_ax - 1e-12 {
            (x[k], x[k] + h)
        } else if x[k] + h > hi_ax + 1e-12 {
            (x[k] - h, x[k])
        } else {
            (x[k] - h, x[k] + h)
        };
        xm[k] = a;
        xp[k] = b;
        let (fm, fp) = (f.eval(&xm), f.eval(&xp));
        if is_sentinel(fm) || is_sentinel(fp) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        g.push((fp - fm) / (b - a));
    }
    Ok(g)
}
