//! Exact discrete Kantorovich problems: plans, potentials, and the
//! transport values built from the ballistic, fixed-end, dual and bilinear
//! costs.

mod simplex;

use crate::costs::{self, CostSpec};
use crate::error::{Error, Result};
use crate::field::dot;
use crate::grid::{is_sentinel, Convexity, GridFunction, SENTINEL};
use crate::measure::DiscreteMeasure;

/// Largest support handled by the dense solver, per side.
pub const MAX_SUPPORT: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    Ballistic,
    FixedEnd,
    DualFixedEnd,
    Bilinear,
    Composed,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    pub kind: CostKind,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>, kind: CostKind) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::SizeMismatch(format!("{rows}x{cols} matrix with {} entries", entries.len())));
        }
        if entries.iter().any(|e| e.is_nan()) {
            return Err(Error::SizeMismatch("NaN cost entry".into()));
        }
        let entries: Vec<f64> = entries
            .into_iter()
            .map(|e| if is_sentinel(e) && e > 0.0 { SENTINEL } else { e })
            .collect();
        let ok_row = (0..rows).all(|i| (0..cols).any(|j| !is_sentinel(entries[i * cols + j])));
        let ok_col = (0..cols).all(|j| (0..rows).any(|i| !is_sentinel(entries[i * cols + j])));
        if !ok_row || !ok_col {
            return Err(Error::Infeasible);
        }
        Ok(Self { rows, cols, entries, kind })
    }

    pub fn from_fn(rows: usize, cols: usize, kind: CostKind, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<Self> {
        let mut e = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                e.push(f(i, j)?);
            }
        }
        Self::new(rows, cols, e, kind)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl TransportPlan {
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != rows * cols {
            return Err(Error::SizeMismatch("plan size".into()));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::SizeMismatch("plan entries must be non-negative".into()));
        }
        Ok(Self { rows, cols, mass })
    }

    /// The independent coupling mu x nu.
    pub fn product(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let mass = mu
            .weights()
            .iter()
            .flat_map(|a| nu.weights().iter().map(move |b| a * b))
            .collect();
        Self { rows: mu.len(), cols: nu.len(), mass }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    /// Largest deviation of either marginal from the given weights.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let r = self.row_sums().iter().zip(mu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(nu.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    /// Entries carrying mass, as (row, column, mass).
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let m = self.get(i, j);
                if m > 0.0 {
                    out.push((i, j, m));
                }
            }
        }
        out
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.support().iter().map(|&(i, j, m)| m * c.get(i, j)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtResult {
    pub plan: TransportPlan,
    pub value: f64,
    /// g on the source atoms, normalized so g[0] = 0.
    pub source_potential: Vec<f64>,
    /// h on the target atoms.
    pub target_potential: Vec<f64>,
    /// integral of h against nu minus integral of g against mu.
    pub dual_value: f64,
    pub gap: f64,
    pub pivots: usize,
}

fn check_sizes(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if cost.rows != mu.len() || cost.cols != nu.len() {
        return Err(Error::SizeMismatch(format!(
            "cost is {}x{}, measures have {} and {} atoms",
            cost.rows,
            cost.cols,
            mu.len(),
            nu.len()
        )));
    }
    if mu.len() > MAX_SUPPORT || nu.len() > MAX_SUPPORT {
        return Err(Error::SizeMismatch(format!("supports above {MAX_SUPPORT} atoms are not handled")));
    }
    Ok(())
}

fn finish(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure, plan: Vec<f64>, g: Vec<f64>, h: Vec<f64>, pivots: usize) -> Result<OtResult> {
    let plan = TransportPlan::new(cost.rows, cost.cols, plan)?;
    let value = plan.cost(cost);
    let dual_value = dot(&h, nu.weights()) - dot(&g, mu.weights());
    Ok(OtResult {
        plan,
        value,
        source_potential: g,
        target_potential: h,
        dual_value,
        gap: (value - dual_value).abs(),
        pivots,
    })
}

/// Minimizes the integral of `cost` over couplings of `mu` (rows) and `nu`
/// (columns).
pub fn solve_min(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OtResult> {
    check_sizes(cost, mu, nu)?;
    let s = simplex::solve(&cost.entries, cost.rows, cost.cols, mu.weights(), nu.weights())?;
    finish(cost, mu, nu, s.plan, s.g, s.h, s.pivots)
}

/// Maximizes the integral of `cost`; potentials satisfy h - g >= cost.
pub fn solve_max(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OtResult> {
    check_sizes(cost, mu, nu)?;
    let neg: Vec<f64> = cost.entries.iter().map(|&c| if is_sentinel(c) { SENTINEL } else { -c }).collect();
    let s = simplex::solve(&neg, cost.rows, cost.cols, mu.weights(), nu.weights())?;
    let g = s.g.iter().map(|v| -v).collect();
    let h = s.h.iter().map(|v| -v).collect();
    finish(cost, mu, nu, s.plan, g, h, s.pivots)
}

pub fn solve(cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure, dir: Direction) -> Result<OtResult> {
    match dir {
        Direction::Min => solve_min(cost, mu, nu),
        Direction::Max => solve_max(cost, mu, nu),
    }
}

fn same_dim(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::SizeMismatch(format!("dimensions {} and {}", mu.dim(), nu.dim())));
    }
    Ok(())
}

/// <v, x> between the atoms of `mu` (rows) and `nu` (columns).
pub fn bilinear_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<CostMatrix> {
    same_dim(mu, nu)?;
    CostMatrix::from_fn(mu.len(), nu.len(), CostKind::Bilinear, |i, j| Ok(dot(&mu.points()[i], &nu.points()[j])))
}

/// Least bilinear transport value.
pub fn w_under(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OtResult> {
    solve_min(&bilinear_cost(mu, nu)?, mu, nu)
}

/// Greatest bilinear transport value.
pub fn w_over(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<OtResult> {
    solve_max(&bilinear_cost(mu, nu)?, mu, nu)
}

/// b_T between covector atoms of `mu0` and point atoms of `nu_t`.
pub fn ballistic_cost_matrix(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<CostMatrix> {
    same_dim(mu0, nu_t)?;
    CostMatrix::from_fn(mu0.len(), nu_t.len(), CostKind::Ballistic, |i, j| {
        let b = costs::ballistic_cost(spec, &mu0.points()[i], &nu_t.points()[j])?;
        Ok(if is_sentinel(b) { SENTINEL } else { b })
    })
}

pub fn fixed_end_cost_matrix(spec: &CostSpec, nu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<CostMatrix> {
    same_dim(nu0, nu_t)?;
    CostMatrix::from_fn(nu0.len(), nu_t.len(), CostKind::FixedEnd, |i, j| {
        costs::fixed_end_cost(spec, &nu0.points()[i], &nu_t.points()[j])
    })
}

pub fn dual_cost_matrix(spec: &CostSpec, mu0: &DiscreteMeasure, mu_t: &DiscreteMeasure) -> Result<CostMatrix> {
    same_dim(mu0, mu_t)?;
    CostMatrix::from_fn(mu0.len(), mu_t.len(), CostKind::DualFixedEnd, |i, j| {
        costs::dual_fixed_end_cost(spec, &mu0.points()[i], &mu_t.points()[j])
    })
}

/// Least ballistic transport value between `mu0` on covectors and `nu_t`.
pub fn ballistic_under(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<OtResult> {
    solve_min(&ballistic_cost_matrix(spec, mu0, nu_t)?, mu0, nu_t)
}

/// Greatest ballistic transport value.
pub fn ballistic_over(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<OtResult> {
    solve_max(&ballistic_cost_matrix(spec, mu0, nu_t)?, mu0, nu_t)
}

/// Fixed-end transport value C_T.
pub fn c_transport(spec: &CostSpec, nu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<OtResult> {
    solve_min(&fixed_end_cost_matrix(spec, nu0, nu_t)?, nu0, nu_t)
}

/// Dual fixed-end transport value between covector measures.
pub fn c_tilde_transport(spec: &CostSpec, mu0: &DiscreteMeasure, mu_t: &DiscreteMeasure) -> Result<OtResult> {
    solve_min(&dual_cost_matrix(spec, mu0, mu_t)?, mu0, mu_t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialReport {
    /// Largest violation of the admissibility inequality (0 when none).
    pub worst_admissibility: f64,
    /// Largest |h - g - cost| over entries that carry mass.
    pub worst_slackness: f64,
    pub pass: bool,
}

/// Verifies h(x) - g(v) <= cost (>= for Max) everywhere and equality on
/// every plan entry with mass above 1e-12.
pub fn check_potentials(result: &OtResult, cost: &CostMatrix, dir: Direction, tol: f64) -> PotentialReport {
    let (g, h) = (&result.source_potential, &result.target_potential);
    let mut adm = 0.0f64;
    let mut slack = 0.0f64;
    for i in 0..cost.rows {
        for j in 0..cost.cols {
            let c = cost.get(i, j);
            if is_sentinel(c) {
                continue;
            }
            let d = h[j] - g[i] - c;
            let viol = match dir {
                Direction::Min => d,
                Direction::Max => -d,
            };
            adm = adm.max(viol);
            if result.plan.get(i, j) > 1e-12 {
                slack = slack.max(d.abs());
            }
        }
    }
    PotentialReport {
        worst_admissibility: adm,
        worst_slackness: slack,
        pass: adm <= tol && slack <= tol,
    }
}

/// h(x) = min_v cost(v, x) + g(v) and g_cc(v) = max_x h(x) - cost(v, x).
/// The pair is admissible and g_cc <= g.
pub fn conjugate_potentials(cost: &CostMatrix, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h: Vec<f64> = (0..cost.cols)
        .map(|j| {
            (0..cost.rows)
                .filter(|&i| !is_sentinel(cost.get(i, j)))
                .map(|i| cost.get(i, j) + g[i])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let gcc: Vec<f64> = (0..cost.rows)
        .map(|i| {
            (0..cost.cols)
                .filter(|&j| !is_sentinel(cost.get(i, j)))
                .map(|j| h[j] - cost.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (gcc, h)
}

/// Potentials that are tight on the support of `plan` and keep every
/// other admissible cell at least `slack` below the cost (Min convention),
/// with `slack` half the largest achievable. None when the plan is not
/// optimal for `cost`.
pub fn strict_dual_potentials(cost: &CostMatrix, plan: &TransportPlan) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let (m, n) = (cost.rows, cost.cols);
    let on = |i: usize, j: usize| plan.get(i, j) > 1e-12;
    // Difference constraints u_b - u_a <= w(a, b) on nodes rows 0..m, cols
    // m..m+n, solved by shortest paths.
    let solve = |s: f64| -> Option<Vec<f64>> {
        let k = m + n;
        let mut dist = vec![f64::INFINITY; k * k];
        for a in 0..k {
            dist[a * k + a] = 0.0;
        }
        for i in 0..m {
            for j in 0..n {
                let c = cost.get(i, j);
                if is_sentinel(c) {
                    continue;
                }
                // h_j - g_i <= c - s (or <= c on the support)
                let w = if on(i, j) { c } else { c - s };
                let e = &mut dist[i * k + m + j];
                *e = e.min(w);
                if on(i, j) {
                    let e = &mut dist[(m + j) * k + i];
                    *e = e.min(-c);
                }
            }
        }
        for p in 0..k {
            for a in 0..k {
                let dap = dist[a * k + p];
                if dap == f64::INFINITY {
                    continue;
                }
                for b in 0..k {
                    let alt = dap + dist[p * k + b];
                    if alt < dist[a * k + b] {
                        dist[a * k + b] = alt;
                    }
                }
            }
        }
        let tol = 1e-12 * (1.0 + cost.entries.iter().filter(|c| !is_sentinel(**c)).fold(0.0f64, |a, c| a.max(c.abs())));
        if (0..k).any(|a| dist[a * k + a] < -tol) {
            return None;
        }
        // Potentials from a virtual source joined to every node at 0.
        Some((0..k).map(|b| (0..k).map(|a| dist[a * k + b]).fold(0.0f64, f64::min)).collect())
    };
    solve(0.0)?;
    let spread = cost.entries.iter().filter(|c| !is_sentinel(**c)).fold(0.0f64, |a, c| a.max(c.abs()));
    let (mut lo, mut hi) = (0.0, 2.0 * spread + 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if solve(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let slack = 0.5 * lo;
    let u = solve(slack)?;
    let g: Vec<f64> = u[..m].iter().map(|v| v - u[0]).collect();
    let h: Vec<f64> = u[m..].iter().map(|v| v - u[0]).collect();
    Some((g, h, slack))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// Non-decreasing pairing; optimal for the greatest bilinear value.
    Monotone,
    /// Non-increasing pairing; optimal for the least bilinear value.
    Antitone,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrenierMap1d {
    /// (source point, target point, mass), sources in increasing order.
    pub pairs: Vec<(f64, f64, f64)>,
    /// Integral of <source, target> over the coupling.
    pub value: f64,
    /// True when every source atom goes to a single target atom.
    pub single_valued: bool,
    /// Cumulative trapezoid integral of the map over the sorted sources,
    /// when single-valued with at least two sources.
    pub potential: Option<GridFunction>,
}

impl BrenierMap1d {
    /// Image of a source atom (mass-weighted mean of its targets).
    pub fn apply(&self, y: f64) -> Option<f64> {
        let (mut m, mut s) = (0.0, 0.0);
        for &(a, b, w) in &self.pairs {
            if a == y {
                m += w;
                s += w * b;
            }
        }
        (m > 0.0).then(|| s / m)
    }
}

/// Quantile coupling of two one-dimensional measures.
pub fn brenier_map_1d(nu0: &DiscreteMeasure, mu0: &DiscreteMeasure, sense: Sense) -> Result<BrenierMap1d> {
    if nu0.dim() != 1 {
        return Err(Error::DimensionUnsupported(nu0.dim()));
    }
    if mu0.dim() != 1 {
        return Err(Error::DimensionUnsupported(mu0.dim()));
    }
    let src: Vec<(f64, f64)> = nu0.sorted_1d().into_iter().filter(|a| a.1 > 0.0).collect();
    let mut tgt: Vec<(f64, f64)> = mu0.sorted_1d().into_iter().filter(|a| a.1 > 0.0).collect();
    if sense == Sense::Antitone {
        tgt.reverse();
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (src[0].1, tgt[0].1);
    while i < src.len() && j < tgt.len() {
        let m = ra.min(rb);
        if m > 0.0 {
            pairs.push((src[i].0, tgt[j].0, m));
        }
        ra -= m;
        rb -= m;
        let tol = 1e-14;
        if ra <= tol {
            i += 1;
            if i < src.len() {
                ra = src[i].1 + ra.min(0.0);
            }
        }
        if rb <= tol {
            j += 1;
            if j < tgt.len() {
                rb = tgt[j].1 + rb.min(0.0);
            }
        }
    }
    let value = pairs.iter().map(|(a, b, m)| a * b * m).sum();
    let mut single_valued = true;
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            single_valued = false;
        }
    }
    let potential = if single_valued && pairs.len() >= 2 {
        let axis: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut vals = vec![0.0; axis.len()];
        for k in 1..axis.len() {
            vals[k] = vals[k - 1] + 0.5 * (pairs[k - 1].1 + pairs[k].1) * (axis[k] - axis[k - 1]);
        }
        let flag = match sense {
            Sense::Monotone => Convexity::Convex,
            Sense::Antitone => Convexity::Concave,
        };
        Some(GridFunction::new(vec![axis], vals, flag)?)
    } else {
        None
    };
    Ok(BrenierMap1d { pairs, value, single_valued, potential })
}
