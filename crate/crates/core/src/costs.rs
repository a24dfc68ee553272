//! Fixed-end, ballistic and dual costs of a Lagrangian, Hopf-Lax value
//! functions, and numerical checks of the relations between the costs.

use crate::error::{Error, Result};
use crate::field::{dot, norm2, ScalarField};
use crate::grid::{self, is_sentinel, Convexity, GridFunction, SENTINEL};
use crate::lagrangian::{dual_lagrangian, hamiltonian_of, DualLagrangian, LagrangianKind, LagrangianSpec};

/// Default number of path segments for variational evaluation.
pub const DEFAULT_SEGMENTS: usize = 32;
const ACTION_TOL: f64 = 1e-8;
const ACTION_MAX_ITER: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CostSpec {
    pub lagrangian: LagrangianSpec,
    pub horizon: f64,
    pub segments: usize,
    /// Axes of the window used when a cost is obtained by infimization over
    /// an intermediate point.
    pub inner_grid: Option<Vec<Vec<f64>>>,
    /// Covector axes on which sampled kinetic terms are conjugated.
    pub dual_axes: Option<Vec<Vec<f64>>>,
    /// Two covectors closer than this count as equal in the dual cost of a
    /// state-independent Lagrangian.
    pub dual_tol: f64,
}

impl CostSpec {
    pub fn new(lagrangian: LagrangianSpec, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidGrid(format!("horizon must be >= 0, got {horizon}")));
        }
        Ok(Self {
            lagrangian,
            horizon,
            segments: DEFAULT_SEGMENTS,
            inner_grid: None,
            dual_axes: None,
            dual_tol: 1e-12,
        })
    }

    pub fn quadratic(mass: f64, horizon: f64) -> Result<Self> {
        Self::new(LagrangianSpec::quadratic(mass)?, horizon)
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        let mut s = self.clone();
        s.horizon = horizon;
        s
    }

    pub fn with_inner_grid(mut self, axes: Vec<Vec<f64>>) -> Self {
        self.inner_grid = Some(axes);
        self
    }

    pub fn with_segments(mut self, n: usize) -> Self {
        self.segments = n.max(1);
        self
    }
}

/// Minimizes the discretized action sum_i dt [K((xi_{i+1} - xi_i)/dt) +
/// (P(xi_i) + P(xi_{i+1}))/2] over interior nodes with xi_0 = a, xi_N = b, by accelerated
/// projected gradient descent (FISTA with adaptive restart). Nodes are
/// projected onto the finite box of `potential` when it is sampled.
pub fn minimize_action(
    kinetic: &ScalarField,
    potential: Option<&ScalarField>,
    a: &[f64],
    b: &[f64],
    horizon: f64,
    segments: usize,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = segments.max(1);
    let d = a.len();
    let dt = horizon / n as f64;
    let straight: Vec<Vec<f64>> = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect()
        })
        .collect();
    let action = |xi: &[Vec<f64>]| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            let vel: Vec<f64> = (0..d).map(|k| (xi[i + 1][k] - xi[i][k]) / dt).collect();
            let mut l = kinetic.value_or_inf(&vel);
            if let Some(p) = potential {
                let pot = 0.5 * (p.value_or_inf(&xi[i]) + p.value_or_inf(&xi[i + 1]));
                l = grid::add(l, pot);
            }
            if is_sentinel(l) {
                return SENTINEL;
            }
            total += dt * l;
        }
        total
    };
    if n == 1 || potential.is_none() && matches!(kinetic, ScalarField::Quadratic { .. }) {
        // Straight lines are optimal for pure kinetic terms by Jensen.
        let v = action(&straight);
        return Ok((v, straight));
    }
    let bbox = potential.and_then(|p| p.domain());
    let project = |xi: &mut Vec<f64>| {
        if let Some(bx) = &bbox {
            for (k, (lo, hi)) in bx.iter().enumerate() {
                xi[k] = xi[k].clamp(*lo, *hi);
            }
        }
    };
    let grad = |xi: &[Vec<f64>]| -> Option<Vec<Vec<f64>>> {
        let mut gr = vec![vec![0.0; d]; n + 1];
        for i in 0..n {
            let vel: Vec<f64> = (0..d).map(|k| (xi[i + 1][k] - xi[i][k]) / dt).collect();
            let kg = kinetic.gradient(&vel)?;
            for k in 0..d {
                gr[i + 1][k] += kg[k];
                gr[i][k] -= kg[k];
            }
            if let Some(p) = potential {
                if i > 0 {
                    let pg = p.gradient(&xi[i])?;
                    for k in 0..d {
                        gr[i][k] += dt * pg[k];
                    }
                }
            }
        }
        Some(gr)
    };
    let lip = 4.0 * kinetic.curvature_bound().max(1e-12) / dt
        + dt * potential.map_or(0.0, |p| p.curvature_bound());
    let step = 1.0 / lip;

    let mut x = straight.clone();
    let mut y = straight;
    let mut tk = 1.0f64;
    let mut resid = f64::INFINITY;
    for it in 0..ACTION_MAX_ITER {
        let gy = grad(&y).ok_or(Error::NoConvergence { iterations: it, residual: f64::NAN })?;
        let mut xn = y.clone();
        for i in 1..n {
            for k in 0..d {
                xn[i][k] -= step * gy[i][k];
            }
            project(&mut xn[i]);
        }
        // Gradient-mapping norm at y.
        resid = (1..n)
            .flat_map(|i| (0..d).map(move |k| (i, k)))
            .map(|(i, k)| ((y[i][k] - xn[i][k]) * lip).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= ACTION_TOL {
            let v = action(&xn);
            return Ok((v, xn));
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        // Restart momentum when it points uphill.
        let uphill: f64 = (1..n)
            .flat_map(|i| (0..d).map(move |k| (i, k)))
            .map(|(i, k)| (y[i][k] - xn[i][k]) * (xn[i][k] - x[i][k]))
            .sum();
        let beta = if uphill > 0.0 {
            tk = 1.0;
            0.0
        } else {
            let b = (tk - 1.0) / tn;
            tk = tn;
            b
        };
        let mut yn = xn.clone();
        for i in 1..n {
            for k in 0..d {
                yn[i][k] = xn[i][k] + beta * (xn[i][k] - x[i][k]);
            }
            project(&mut yn[i]);
        }
        x = xn;
        y = yn;
    }
    Err(Error::NoConvergence { iterations: ACTION_MAX_ITER, residual: resid })
}

/// c_T(y, x): least action over paths from `y` to `x` in time T.
pub fn fixed_end_cost(spec: &CostSpec, y: &[f64], x: &[f64]) -> Result<f64> {
    let t = spec.horizon;
    if t == 0.0 {
        return Ok(if y == x { 0.0 } else { SENTINEL });
    }
    match &spec.lagrangian.kind {
        LagrangianKind::Quadratic { mass } => {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(mass * d2 / (2.0 * t))
        }
        LagrangianKind::StateIndependent { l0 } => {
            let vel: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b) / t).collect();
            let v = l0.value_or_inf(&vel);
            Ok(if is_sentinel(v) { SENTINEL } else { t * v })
        }
        LagrangianKind::SeparableConvex { l0, potential } => match harmonic_coefficients(l0, potential, t) {
            Some((a, c)) => Ok(a * (c * (norm2(x) + norm2(y)) - 2.0 * dot(x, y))),
            None => fixed_end_cost_variational(spec, y, x),
        },
    }
}

/// For L = m|p|^2/2 + k|x|^2/2 with k > 0, c_T(y, x) = A (C (|x|^2 + |y|^2)
/// - 2 <x, y>) with A = m w / (2 sinh wT), C = cosh wT and w = sqrt(k/m).
fn harmonic_coefficients(l0: &ScalarField, potential: &ScalarField, t: f64) -> Option<(f64, f64)> {
    match (l0, potential) {
        (ScalarField::Quadratic { scale: m }, ScalarField::Quadratic { scale: k }) if *k > 0.0 => {
            let w = (k / m).sqrt();
            Some((m * w / (2.0 * (w * t).sinh()), (w * t).cosh()))
        }
        _ => None,
    }
}

/// c_T(y, x) by direct minimization of the discretized action, whatever
/// the variant.
pub fn fixed_end_cost_variational(spec: &CostSpec, y: &[f64], x: &[f64]) -> Result<f64> {
    let l = &spec.lagrangian;
    minimize_action(&l.kinetic(), l.potential(), y, x, spec.horizon, spec.segments).map(|r| r.0)
}

/// b_T(v, x) = inf_y <v, y> + c_T(y, x).
pub fn ballistic_cost(spec: &CostSpec, v: &[f64], x: &[f64]) -> Result<f64> {
    if spec.horizon == 0.0 {
        return Ok(dot(v, x));
    }
    if spec.lagrangian.is_state_independent() {
        let h = spec.lagrangian.h0(v);
        return Ok(if is_sentinel(h) { -SENTINEL } else { dot(v, x) - spec.horizon * h });
    }
    if let LagrangianKind::SeparableConvex { l0, potential } = &spec.lagrangian.kind {
        if let Some((a, c)) = harmonic_coefficients(l0, potential, spec.horizon) {
            let y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi / c - vi / (2.0 * a * c)).collect();
            return Ok(dot(v, &y) + a * (c * (norm2(x) + norm2(&y)) - 2.0 * dot(x, &y)));
        }
    }
    let axes = spec
        .inner_grid
        .as_ref()
        .ok_or_else(|| Error::InvalidGrid("state-dependent ballistic cost needs an inner grid".into()))?;
    ballistic_cost_scan(spec, v, x, axes).map(|r| r.0)
}

/// Minimum of <v, y> + c_T(y, x) over the window `axes`, with the argmin,
/// refined inside the cells around the best node.
pub fn ballistic_cost_scan(spec: &CostSpec, v: &[f64], x: &[f64], axes: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let err = std::cell::RefCell::new(None);
    let best = scan_min(
        |y| match fixed_end_cost(spec, y, x) {
            Ok(c) if is_sentinel(c) => SENTINEL,
            Ok(c) => dot(v, y) + c,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                SENTINEL
            }
        },
        axes,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// c~_T(u, w): least dual action over covector paths from `u` to `w`.
pub fn dual_fixed_end_cost(spec: &CostSpec, u: &[f64], w: &[f64]) -> Result<f64> {
    let t = spec.horizon;
    if t == 0.0 {
        return Ok(if u == w { 0.0 } else { SENTINEL });
    }
    let dual = dual_lagrangian(&spec.lagrangian, spec.dual_axes.as_deref())?;
    match dual {
        DualLagrangian::Constrained { .. } => {
            let gap = norm2(&u.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt();
            if gap <= spec.dual_tol {
                let h = spec.lagrangian.h0(u);
                Ok(if is_sentinel(h) { SENTINEL } else { t * h })
            } else {
                Ok(SENTINEL)
            }
        }
        DualLagrangian::Separable { h0, potential_conjugate } => match harmonic_coefficients(&potential_conjugate, &h0, t) {
            Some((a, c)) => Ok(a * (c * (norm2(u) + norm2(w)) - 2.0 * dot(u, w))),
            None => minimize_action(&potential_conjugate, Some(&h0), u, w, t, spec.segments).map(|r| r.0),
        },
    }
}

pub(crate) fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if axes.len() == 1 {
        axes[0].iter().map(|v| vec![*v]).collect()
    } else {
        let mut out = Vec::with_capacity(axes[0].len() * axes[1].len());
        for a in &axes[0] {
            for b in &axes[1] {
                out.push(vec![*a, *b]);
            }
        }
        out
    }
}

/// Minimum of a convex function over a grid window: exhaustive scan of the
/// nodes, then golden-section refinement of each coordinate inside the
/// neighbouring cells of the best node.
pub fn scan_min(f: impl Fn(&[f64]) -> f64, axes: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let pts = grid_points(axes);
    let mut best = (f64::INFINITY, pts[0].clone());
    for p in pts {
        let v = f(&p);
        if v < best.0 {
            best = (v, p);
        }
    }
    if is_sentinel(best.0) {
        return best;
    }
    let mut x = best.1.clone();
    let mut fx = best.0;
    for _sweep in 0..if axes.len() == 1 { 1 } else { 4 } {
        for k in 0..axes.len() {
            let ax = &axes[k];
            let pos = ax.partition_point(|&a| a < x[k]).min(ax.len() - 1);
            let lo = ax[pos.saturating_sub(1)];
            let hi = ax[(pos + 1).min(ax.len() - 1)];
            let mut probe = x.clone();
            let (t, v) = golden(
                |s| {
                    probe[k] = s;
                    f(&probe)
                },
                lo,
                hi,
            );
            if v < fx {
                fx = v;
                x[k] = t;
            }
        }
    }
    (fx, x)
}

fn golden(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// One sample for the cost-duality report.
#[derive(Clone, Debug, PartialEq)]
pub struct DualitySample {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostDualityReport {
    /// max |b(v,x) - inf_y (<v,y> + c(y,x))|
    pub ballistic_from_fixed: f64,
    /// max |c(y,x) - sup_v (b(v,x) - <v,y>)|
    pub fixed_from_ballistic: f64,
    /// max |b(v,x) - sup_w (<w,x> - c~(v,w))|
    pub ballistic_from_dual: f64,
    /// Bound expected from the finite windows (spacing times slope).
    pub grid_bound: f64,
    pub samples: usize,
}

impl CostDualityReport {
    pub fn max_violation(&self) -> f64 {
        self.ballistic_from_fixed.max(self.fixed_from_ballistic).max(self.ballistic_from_dual)
    }
}

/// Checks the three relations between b, c and c~ at every sample. The
/// infima and suprema run over `window` (used for y, v and w alike) with
/// sub-cell refinement. When the dual cost is only finite on u = w, that
/// point is added to the w-scan.
pub fn verify_cost_dualities(spec: &CostSpec, samples: &[DualitySample], window: &[Vec<f64>]) -> Result<CostDualityReport> {
    let constrained = matches!(
        dual_lagrangian(&spec.lagrangian, spec.dual_axes.as_deref())?,
        DualLagrangian::Constrained { .. }
    );
    let spacing = window
        .iter()
        .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
        .fold(0.0, f64::max);
    let mut rep = CostDualityReport {
        ballistic_from_fixed: 0.0,
        fixed_from_ballistic: 0.0,
        ballistic_from_dual: 0.0,
        grid_bound: 0.0,
        samples: samples.len(),
    };
    for s in samples {
        let b = ballistic_cost(spec, &s.v, &s.x)?;
        let c = fixed_end_cost(spec, &s.y, &s.x)?;

        let (inf_y, _) = scan_min(
            |y| {
                let c = fixed_end_cost(spec, y, &s.x).unwrap_or(SENTINEL);
                if is_sentinel(c) {
                    SENTINEL
                } else {
                    dot(&s.v, y) + c
                }
            },
            window,
        );
        rep.ballistic_from_fixed = rep.ballistic_from_fixed.max((b - inf_y).abs());

        if !is_sentinel(c) {
            let (neg_sup_v, _) = scan_min(
                |v| {
                    let bv = ballistic_cost(spec, v, &s.x).unwrap_or(-SENTINEL);
                    if is_sentinel(bv) {
                        SENTINEL
                    } else {
                        -(bv - dot(v, &s.y))
                    }
                },
                window,
            );
            rep.fixed_from_ballistic = rep.fixed_from_ballistic.max((c + neg_sup_v).abs());
        }

        let tilde = |w: &[f64]| {
            let ct = dual_fixed_end_cost(spec, &s.v, w).unwrap_or(SENTINEL);
            if is_sentinel(ct) {
                SENTINEL
            } else {
                -(dot(w, &s.x) - ct)
            }
        };
        let mut best = if constrained { SENTINEL } else { scan_min(tilde, window).0 };
        best = best.min(tilde(&s.v));
        rep.ballistic_from_dual = rep.ballistic_from_dual.max((b + best).abs());

        let slope = norm2(&s.v).sqrt() + norm2(&s.x).sqrt() + norm2(&s.y).sqrt() + 1.0;
        rep.grid_bound = rep.grid_bound.max(spacing * slope);
    }
    Ok(rep)
}

/// V(t, x) = min over the nodes y of `g` of g(y) + c_t(y, x), at each point.
pub fn hopf_lax_at(spec: &CostSpec, g: &GridFunction, t: f64, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if g.argmin().is_none() {
        return Err(Error::EmptyDomain);
    }
    let st = spec.with_horizon(t);
    let nodes: Vec<(Vec<f64>, f64)> = (0..g.len())
        .filter(|&i| !is_sentinel(g.values()[i]))
        .map(|i| (g.point(i), g.values()[i]))
        .collect();
    points
        .iter()
        .map(|x| {
            let mut best = SENTINEL;
            for (y, gy) in &nodes {
                let c = fixed_end_cost(&st, y, x)?;
                if !is_sentinel(c) {
                    best = best.min(gy + c);
                }
            }
            Ok(best)
        })
        .collect()
}

/// Hopf-Lax value function V_g(t, .) sampled on the axes of `g`.
pub fn hopf_lax_propagate(spec: &CostSpec, g: &GridFunction, t: f64) -> Result<GridFunction> {
    let pts = g.points();
    let vals = hopf_lax_at(spec, g, t, &pts)?;
    let flag = if g.flag() == Convexity::Convex { Convexity::Convex } else { Convexity::Unknown };
    GridFunction::new(g.axes().to_vec(), vals, flag)
}

/// V_g(t, x) = max over covector nodes v of b_t(v, x) - g*(v), sampled on
/// `axes`; an independent route to the value function of a convex `g`.
pub fn hopf_lax_dual(spec: &CostSpec, g_star: &GridFunction, t: f64, axes: &[Vec<f64>]) -> Result<GridFunction> {
    if g_star.argmin().is_none() {
        return Err(Error::EmptyDomain);
    }
    let st = spec.with_horizon(t);
    let nodes: Vec<(Vec<f64>, f64)> = (0..g_star.len())
        .filter(|&i| !is_sentinel(g_star.values()[i]))
        .map(|i| (g_star.point(i), g_star.values()[i]))
        .collect();
    let err = std::cell::RefCell::new(None);
    let f = GridFunction::from_fn(axes.to_vec(), Convexity::Convex, |x| {
        let mut best = -SENTINEL;
        for (v, gs) in &nodes {
            match ballistic_cost(&st, v, x) {
                Ok(b) if !is_sentinel(b) => best = best.max(b - gs),
                Ok(_) => {}
                Err(e) => *err.borrow_mut() = Some(e),
            }
        }
        best
    })?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(f),
    }
}

/// Largest |dV/dt + H(x, grad V)| over interior space-time nodes, by
/// central differences. Nodes where forward and backward spatial slopes
/// differ by more than sqrt(h) are treated as kinks, and every node within
/// `kink_margin` of a kink is left out.
pub fn hj_residual(spec: &CostSpec, times: &[f64], slices: &[GridFunction], kink_margin: f64) -> Result<f64> {
    if times.len() < 3 || times.len() != slices.len() {
        return Err(Error::GridMismatch("need at least three matching time slices".into()));
    }
    let axes = slices[0].axes().to_vec();
    if slices.iter().any(|s| s.axes() != axes.as_slice()) {
        return Err(Error::GridMismatch("slices must share axes".into()));
    }
    let h = hamiltonian_of(&spec.lagrangian, spec.dual_axes.as_deref())?;
    let exact_h0 = |q: &[f64]| spec.lagrangian.h0(q);
    let d = axes.len();
    let mut worst = 0.0f64;
    for k in 1..times.len() - 1 {
        let s = &slices[k];
        let kinks = kink_nodes(s);
        for idx in 0..s.len() {
            let node = s.node_index(idx);
            if (0..d).any(|a| node[a] == 0 || node[a] + 1 == axes[a].len()) {
                continue;
            }
            let x = s.point(idx);
            if kinks.iter().any(|kp| norm2(&kp.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt() <= kink_margin) {
                continue;
            }
            let dt = (slices[k + 1].values()[idx] - slices[k - 1].values()[idx]) / (times[k + 1] - times[k - 1]);
            let grad = s.node_gradient(&node);
            let ham = exact_h0(&grad) - h.potential.as_ref().map_or(0.0, |u| u.value(&x));
            let r = (dt + ham).abs();
            if r.is_finite() {
                worst = worst.max(r);
            }
        }
    }
    Ok(worst)
}

fn kink_nodes(s: &GridFunction) -> Vec<Vec<f64>> {
    let d = s.dim();
    let mut out = Vec::new();
    for idx in 0..s.len() {
        let node = s.node_index(idx);
        for a in 0..d {
            let ax = &s.axes()[a];
            if node[a] == 0 || node[a] + 1 == ax.len() {
                continue;
            }
            let mut lo = node.clone();
            let mut hi = node.clone();
            lo[a] -= 1;
            hi[a] += 1;
            let flat = |n: &[usize]| if d == 1 { n[0] } else { n[0] * s.axes()[1].len() + n[1] };
            let (f0, f1, f2) = (s.values()[flat(&lo)], s.values()[idx], s.values()[flat(&hi)]);
            let (h0, h1) = (ax[node[a]] - ax[lo[a]], ax[hi[a]] - ax[node[a]]);
            let jump = ((f2 - f1) / h1 - (f1 - f0) / h0).abs();
            if jump > h0.max(h1).sqrt() {
                out.push(s.point(idx));
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use proptest::prelude::*;

    fn quad(t: f64) -> CostSpec {
        CostSpec::quadratic(1.0, t).unwrap()
    }

    fn harmonic_lagrangian() -> LagrangianSpec {
        LagrangianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, ScalarField::Quadratic { scale: 1.0 }).unwrap()
    }

    #[test]
    fn fixed_end_examples() {
        assert_eq!(fixed_end_cost(&quad(1.0), &[0.0], &[2.0]).unwrap(), 2.0);
        assert_eq!(fixed_end_cost(&quad(2.0), &[0.0], &[2.0]).unwrap(), 1.0);
        let spec = CostSpec::new(harmonic_lagrangian(), 1.0).unwrap();
        assert!(fixed_end_cost(&spec, &[0.0], &[0.0]).unwrap().abs() < 1e-14);
    }

    #[test]
    fn separable_variational_matches_discrete_optimum() {
        // L = p^2/2 + x^2/2 from 0 to 1 in time 1. The continuum value is
        // coth(1)/2 ~ 0.6565; the trapezoid rule is off at O(1/N^2).
        let exact = 0.5 / 1f64.tanh();
        let err = |n: usize| {
            let spec = CostSpec::new(harmonic_lagrangian(), 1.0).unwrap().with_segments(n);
            (fixed_end_cost_variational(&spec, &[0.0], &[1.0]).unwrap() - exact).abs()
        };
        let closed = CostSpec::new(harmonic_lagrangian(), 1.0).unwrap();
        assert!((fixed_end_cost(&closed, &[0.0], &[1.0]).unwrap() - exact).abs() < 1e-15);
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 2e-4, "{e1}");
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn sampled_potential_variational() {
        let u = GridFunction::from_fn(vec![linspace(-3.0, 3.0, 601)], Convexity::Convex, |x| 0.5 * x[0] * x[0]).unwrap();
        let spec = CostSpec::new(
            LagrangianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, ScalarField::Grid(u)).unwrap(),
            1.0,
        )
        .unwrap()
        .with_segments(128);
        let closed = CostSpec::new(harmonic_lagrangian(), 1.0).unwrap();
        let a = fixed_end_cost(&spec, &[0.0], &[1.0]).unwrap();
        let b = fixed_end_cost(&closed, &[0.0], &[1.0]).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn ballistic_examples() {
        assert_eq!(ballistic_cost(&quad(0.0), &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(ballistic_cost(&quad(1.0), &[1.0], &[3.0]).unwrap(), 2.5);
        let axes = vec![axis(-8.0, 8.0, 1.0)];
        let (v, y) = ballistic_cost_scan(&quad(1.0), &[1.0], &[3.0], &axes).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
        assert!((y[0] - 2.0).abs() < 1e-6);
    }

    fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
        grid::axis_with_spacing(lo, hi, h)
    }

    #[test]
    fn dual_cost_examples() {
        assert_eq!(dual_fixed_end_cost(&quad(2.0), &[1.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(dual_fixed_end_cost(&quad(1.0), &[1.0], &[2.0]).unwrap(), SENTINEL);
        assert_eq!(dual_fixed_end_cost(&quad(3.0), &[0.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn separable_dual_cost_uses_dual_lagrangian() {
        // L = p^2/2 + x^2/2 gives L~(v, q) = v^2/2 + q^2/2: the same form.
        let spec = CostSpec::new(harmonic_lagrangian(), 1.0).unwrap().with_segments(64);
        let a = dual_fixed_end_cost(&spec, &[0.0], &[1.0]).unwrap();
        let b = fixed_end_cost(&spec, &[0.0], &[1.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
        let c = fixed_end_cost_variational(&spec, &[0.0], &[1.0]).unwrap();
        assert!((a - c).abs() < 1e-4);
    }

    #[test]
    fn cost_dualities_quadratic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<DualitySample> = (0..10)
            .map(|_| DualitySample {
                y: vec![rng.gen_range(-2.0..2.0)],
                v: vec![rng.gen_range(-2.0..2.0)],
                x: vec![rng.gen_range(-2.0..2.0)],
            })
            .collect();
        let rep = verify_cost_dualities(&quad(1.0), &samples, &[linspace(-8.0, 8.0, 2001)]).unwrap();
        assert!(rep.max_violation() <= 1e-6, "{rep:?}");
        let rep0 = verify_cost_dualities(&quad(0.0), &samples, &[linspace(-8.0, 8.0, 2001)]).unwrap();
        assert!(rep0.ballistic_from_dual == 0.0, "{rep0:?}");
    }

    #[test]
    fn hopf_lax_examples() {
        let g = GridFunction::from_fn(vec![axis(-6.0, 6.0, 0.01)], Convexity::Convex, |y| y[0].abs()).unwrap();
        let v = hopf_lax_at(&quad(1.0), &g, 1.0, &[vec![2.0], vec![0.5]]).unwrap();
        assert!((v[0] - 1.5).abs() < 1e-9);
        assert!((v[1] - 0.125).abs() < 1e-9);

        let lin = GridFunction::from_fn(vec![axis(-6.0, 6.0, 0.01)], Convexity::Convex, |y| y[0]).unwrap();
        let v = hopf_lax_at(&quad(1.0), &lin, 0.5, &[vec![1.0]]).unwrap();
        assert!((v[0] - (1.0 - 0.25)).abs() < 1e-9);

        let zero = GridFunction::from_fn(vec![axis(-2.0, 2.0, 0.1)], Convexity::Convex, |_| 0.0).unwrap();
        let z = hopf_lax_propagate(&quad(1.0), &zero, 0.7).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
        assert_eq!(z.flag(), Convexity::Convex);
    }

    #[test]
    fn hopf_lax_dual_route_agrees() {
        let ax = vec![axis(-4.0, 4.0, 0.01)];
        let out = vec![axis(-1.0, 1.0, 0.1)];
        let spec = quad(1.0);
        for (name, f) in [
            ("quadratic", Box::new(|y: &[f64]| 0.5 * y[0] * y[0]) as Box<dyn Fn(&[f64]) -> f64>),
            ("abs", Box::new(|y: &[f64]| y[0].abs())),
            ("linear", Box::new(|y: &[f64]| 0.5 * y[0])),
        ] {
            let g = GridFunction::from_fn(ax.clone(), Convexity::Convex, &*f).unwrap();
            let gs = grid::legendre_conjugate(&g, &ax).unwrap();
            let primal = hopf_lax_at(&spec, &g, 1.0, &grid_points(&out)).unwrap();
            let dual = hopf_lax_dual(&spec, &gs, 1.0, &out).unwrap();
            for (a, b) in primal.iter().zip(dual.values()) {
                assert!((a - b).abs() < 2e-4, "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hj_residual_examples() {
        let spec = quad(1.0);
        let ax = vec![axis(-2.0, 2.0, 0.01)];
        let times = [0.5, 0.51, 0.52];
        let slices: Vec<GridFunction> = times
            .iter()
            .map(|&t| GridFunction::from_fn(ax.clone(), Convexity::Convex, |x| x[0] - t / 2.0).unwrap())
            .collect();
        assert!(hj_residual(&spec, &times, &slices, 0.0).unwrap() < 1e-9);

        let consts: Vec<GridFunction> = times
            .iter()
            .map(|_| GridFunction::from_fn(ax.clone(), Convexity::Convex, |_| 3.0).unwrap())
            .collect();
        assert_eq!(hj_residual(&spec, &times, &consts, 0.0).unwrap(), 0.0);

        // Moreau envelope of |y| propagated by Hopf-Lax.
        let g = GridFunction::from_fn(vec![axis(-6.0, 6.0, 0.01)], Convexity::Convex, |y| y[0].abs()).unwrap();
        let slices: Vec<GridFunction> = times.iter().map(|&t| hopf_lax_propagate(&spec, &g, t).unwrap()).collect();
        let r = hj_residual(&spec, &times, &slices, 0.1).unwrap();
        assert!(r < 0.02, "residual {r}");
    }

    #[test]
    fn semigroup_and_monotonicity() {
        let spec = quad(1.0);
        let ax = vec![axis(-5.0, 5.0, 0.02)];
        let g = GridFunction::from_fn(ax.clone(), Convexity::Convex, |y| y[0].abs() + 0.1 * y[0]).unwrap();
        let two = hopf_lax_propagate(&spec, &g, 0.8).unwrap();
        let step = hopf_lax_propagate(&spec, &hopf_lax_propagate(&spec, &g, 0.3).unwrap(), 0.5).unwrap();
        let probe: Vec<usize> = (0..ax[0].len()).filter(|&i| ax[0][i].abs() <= 2.0).collect();
        let single_step_tol = 0.01f64.powi(2) / (2.0 * 0.3);
        for &i in &probe {
            assert!((two.values()[i] - step.values()[i]).abs() <= 2.0 * single_step_tol + 1e-12);
        }
        let g2 = g.map(|_, v| v + 0.3).unwrap();
        let v2 = hopf_lax_propagate(&spec, &g2, 0.8).unwrap();
        assert!(two.values().iter().zip(v2.values()).all(|(a, b)| a <= b));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ballistic_convex_in_x_concave_in_v(v in -3.0..3.0f64, x in -3.0..3.0f64, h in 0.01..1.0f64, t in 0.1..3.0f64) {
            let spec = quad(t);
            let b = |v: f64, x: f64| ballistic_cost(&spec, &[v], &[x]).unwrap();
            prop_assert!(b(v, x - h) + b(v, x + h) - 2.0 * b(v, x) >= -1e-9);
            prop_assert!(b(v - h, x) + b(v + h, x) - 2.0 * b(v, x) <= 1e-9);
        }

        #[test]
        fn fixed_end_jointly_convex(y1 in -3.0..3.0f64, x1 in -3.0..3.0f64, y2 in -3.0..3.0f64, x2 in -3.0..3.0f64) {
            let l0 = GridFunction::from_fn(vec![linspace(-10.0, 10.0, 201)], Convexity::Convex, |p| p[0].abs() + 0.25 * p[0] * p[0]).unwrap();
            let spec = CostSpec::new(LagrangianSpec::state_independent(ScalarField::Grid(l0)).unwrap(), 1.0).unwrap();
            let c = |y: f64, x: f64| fixed_end_cost(&spec, &[y], &[x]).unwrap();
            let mid = c(0.5 * (y1 + y2), 0.5 * (x1 + x2));
            prop_assert!(mid <= 0.5 * (c(y1, x1) + c(y2, x2)) + 1e-9);
        }

        #[test]
        fn hopf_lax_monotone(shift in 0.0..1.0f64, t in 0.1..2.0f64) {
            let spec = quad(1.0);
            let ax = vec![axis(-3.0, 3.0, 0.1)];
            let g1 = GridFunction::from_fn(ax.clone(), Convexity::Convex, |y| y[0] * y[0]).unwrap();
            let g2 = GridFunction::from_fn(ax, Convexity::Convex, |y| y[0] * y[0] + shift * (1.0 + y[0].abs())).unwrap();
            let v1 = hopf_lax_propagate(&spec, &g1, t).unwrap();
            let v2 = hopf_lax_propagate(&spec, &g2, t).unwrap();
            prop_assert!(v1.values().iter().zip(v2.values()).all(|(a, b)| a <= b));
        }
    }
}
