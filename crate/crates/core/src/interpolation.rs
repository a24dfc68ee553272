//! Interpolation identities on the space of measures: the ballistic value
//! as an infimal convolution of a bilinear and a fixed-end transport value
//! (and its sup mirror), duality through Hopf-Lax value functions, the
//! reverse construction of an initial covector measure, and the map
//! factorization of a fixed-end transport value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::{self, grid_points, scan_min, CostSpec};
use crate::error::{Error, Result};
use crate::field::{dot, norm2, ScalarField};
use crate::grid::{axis_with_spacing, is_convex, is_sentinel, Convexity, ConvexityReport, GridFunction, SENTINEL};
use crate::lagrangian::{dual_lagrangian, hamiltonian_of, DualLagrangian, LagrangianKind, LagrangianSpec};
use crate::measure::DiscreteMeasure;
use crate::ot::{self, CostKind, CostMatrix, Sense};

/// Two independently computed sides of an identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Certificate {
    pub fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let difference = (lhs - rhs).abs();
        Self { lhs, rhs, difference, tolerance, pass: difference <= tolerance }
    }

    /// One-sided: passes when lhs <= rhs + tolerance.
    pub fn at_most(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let difference = (lhs - rhs).abs();
        Self { lhs, rhs, difference, tolerance, pass: lhs <= rhs + tolerance }
    }
}

/// Cost matrix whose entries are optimized over an intermediate grid, with
/// the optimizing node of every entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedCost {
    pub matrix: CostMatrix,
    /// Row-major, one point per entry.
    pub argmin: Vec<Vec<f64>>,
}

/// Mass routed through one intermediate point.
#[derive(Clone, Debug, PartialEq)]
pub struct PairArgmin {
    pub source: usize,
    pub target: usize,
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationResult {
    pub value: f64,
    pub intermediate: DiscreteMeasure,
    pub pairs: Vec<PairArgmin>,
    /// Composed-cost optimum against the two transport values recomputed
    /// through the intermediate measure.
    pub certificate: Certificate,
    /// Exact ballistic value on the original supports.
    pub ballistic_value: f64,
    /// Concavity (min problem) or convexity (max problem) of the extracted
    /// potential, sampled on the intermediate grid.
    pub potential_shape: ConvexityReport,
    /// Duality gap of the extracted potential pair for the fixed-end
    /// transport through the intermediate measure.
    pub potential_gap: f64,
}

fn check_dims(a: &DiscreteMeasure, b: &DiscreteMeasure, axes: &[Vec<f64>]) -> Result<()> {
    if a.dim() != b.dim() || a.dim() != axes.len() {
        return Err(Error::SizeMismatch(format!(
            "dimensions {}, {} and grid {}",
            a.dim(),
            b.dim(),
            axes.len()
        )));
    }
    Ok(())
}

/// entry(v, x) = min over nodes y of `y_axes` of <v, y> + c_T(y, x).
pub fn composed_cost(spec: &CostSpec, sources: &[Vec<f64>], y_axes: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<ComposedCost> {
    let ys = grid_points(y_axes);
    let mut entries = Vec::with_capacity(sources.len() * targets.len());
    let mut argmin = Vec::with_capacity(entries.capacity());
    // c_T does not depend on the source; tabulate it once per target.
    for v in sources {
        for x in targets {
            let mut best = (SENTINEL, ys[0].clone());
            for y in &ys {
                let c = costs::fixed_end_cost(spec, y, x)?;
                if is_sentinel(c) {
                    continue;
                }
                let val = dot(v, y) + c;
                if val < best.0 {
                    best = (val, y.clone());
                }
            }
            entries.push(best.0);
            argmin.push(best.1);
        }
    }
    let matrix = CostMatrix::new(sources.len(), targets.len(), entries, CostKind::Composed)?;
    Ok(ComposedCost { matrix, argmin })
}

/// Same as `composed_cost` but with the table of c_T computed once; used
/// when many sources share the targets.
fn composed_cost_cached(spec: &CostSpec, sources: &[Vec<f64>], y_axes: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<ComposedCost> {
    let ys = grid_points(y_axes);
    let mut table = Vec::with_capacity(ys.len() * targets.len());
    for x in targets {
        for y in &ys {
            table.push(costs::fixed_end_cost(spec, y, x)?);
        }
    }
    let mut entries = Vec::with_capacity(sources.len() * targets.len());
    let mut argmin = Vec::with_capacity(entries.capacity());
    for v in sources {
        for j in 0..targets.len() {
            let mut best = (SENTINEL, 0usize);
            for (k, y) in ys.iter().enumerate() {
                let c = table[j * ys.len() + k];
                if is_sentinel(c) {
                    continue;
                }
                let val = dot(v, y) + c;
                if val < best.0 {
                    best = (val, k);
                }
            }
            entries.push(best.0);
            argmin.push(ys[best.1].clone());
        }
    }
    let matrix = CostMatrix::new(sources.len(), targets.len(), entries, CostKind::Composed)?;
    Ok(ComposedCost { matrix, argmin })
}

/// Ballistic costs of state-dependent Lagrangians need a window for the
/// inner infimum; default it to the intermediate grid.
fn with_window(spec: &CostSpec, axes: &[Vec<f64>]) -> CostSpec {
    let mut s = spec.clone();
    if s.inner_grid.is_none() && !s.lagrangian.is_state_independent() {
        s.inner_grid = Some(axes.to_vec());
    }
    s
}

fn routed(plan: &ot::TransportPlan, argmin: &[Vec<f64>]) -> (Vec<PairArgmin>, Result<DiscreteMeasure>) {
    let cols = plan.cols();
    let pairs: Vec<PairArgmin> = plan
        .support()
        .into_iter()
        .filter(|s| s.2 > 1e-15)
        .map(|(i, j, m)| PairArgmin { source: i, target: j, point: argmin[i * cols + j].clone(), mass: m })
        .collect();
    let nu = DiscreteMeasure::normalized(
        pairs.iter().map(|p| p.point.clone()).collect(),
        pairs.iter().map(|p| p.mass).collect(),
        1e-9,
    );
    (pairs, nu)
}

/// Sum of max(0, entry) tolerance scale for LP certificates.
fn lp_tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

/// The least ballistic value as an infimum over intermediate measures
/// supported on the nodes of `y_axes`.
pub fn interpolate_min(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, y_axes: &[Vec<f64>]) -> Result<InterpolationResult> {
    check_dims(mu0, nu_t, y_axes)?;
    let spec = with_window(spec, y_axes);
    let cc = composed_cost_cached(&spec, mu0.points(), y_axes, nu_t.points())?;
    let opt = ot::solve_min(&cc.matrix, mu0, nu_t)?;
    let (pairs, nu0) = routed(&opt.plan, &cc.argmin);
    let nu0 = nu0?;
    let w = ot::w_under(mu0, &nu0)?;
    let c = ot::c_transport(&spec, &nu0, nu_t)?;
    let certificate = Certificate::new(opt.value, w.value + c.value, lp_tol(opt.value));

    let b = ot::ballistic_under(&spec, mu0, nu_t)?;
    let bm = ot::ballistic_cost_matrix(&spec, mu0, nu_t)?;
    let (g, h) = ot::conjugate_potentials(&bm, &b.source_potential);
    // psi(y) = min_v <v, y> + g(v): the initial potential of the fixed-end
    // problem induced by the ballistic potentials.
    let atoms: Vec<(Vec<f64>, f64)> = mu0.points().iter().cloned().zip(g).collect();
    let psi = |y: &[f64]| atoms.iter().map(|(v, gv)| dot(v, y) + gv).fold(f64::INFINITY, f64::min);
    let psi_grid = GridFunction::from_fn(y_axes.to_vec(), Convexity::Concave, psi)?;
    let potential_shape = is_convex(&psi_grid.neg(), 1e-9 * (1.0 + psi_grid.lipschitz_bound()));
    let dual = dot(&h, nu_t.weights()) - nu0.integrate(psi);
    let potential_gap = (c.value - dual).abs();

    Ok(InterpolationResult {
        value: opt.value,
        intermediate: nu0,
        pairs,
        certificate,
        ballistic_value: b.value,
        potential_shape,
        potential_gap,
    })
}

fn constrained_dual(spec: &CostSpec) -> Result<bool> {
    Ok(matches!(
        dual_lagrangian(&spec.lagrangian, spec.dual_axes.as_deref())?,
        DualLagrangian::Constrained { .. }
    ))
}

/// The greatest ballistic value as a supremum over final covector measures
/// supported on the nodes of `w_axes` (and on the atoms of `mu0`, where the
/// dual cost of a state-independent Lagrangian is finite).
pub fn interpolate_max(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, w_axes: &[Vec<f64>]) -> Result<InterpolationResult> {
    check_dims(mu0, nu_t, w_axes)?;
    let spec = with_window(spec, w_axes);
    let constrained = constrained_dual(&spec)?;
    let ws = grid_points(w_axes);
    let (m, n) = (mu0.len(), nu_t.len());
    let mut entries = Vec::with_capacity(m * n);
    let mut argmax = Vec::with_capacity(m * n);
    for v in mu0.points() {
        let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut push = |w: &Vec<f64>| -> Result<()> {
            let ct = costs::dual_fixed_end_cost(&spec, v, w)?;
            if !is_sentinel(ct) {
                cands.push((w.clone(), ct));
            }
            Ok(())
        };
        push(v)?;
        if !constrained {
            for w in &ws {
                push(w)?;
            }
        }
        for x in nu_t.points() {
            let best = cands
                .iter()
                .map(|(w, ct)| (dot(w, x) - ct, w))
                .fold((-SENTINEL, v), |a, b| if b.0 > a.0 { b } else { a });
            entries.push(best.0);
            argmax.push(best.1.clone());
        }
    }
    let matrix = CostMatrix::new(m, n, entries, CostKind::Composed)?;
    let opt = ot::solve_max(&matrix, mu0, nu_t)?;
    let (pairs, mu_t) = routed(&opt.plan, &argmax);
    let mu_t = mu_t?;
    let w = ot::w_over(nu_t, &mu_t)?;
    let ct = ot::c_tilde_transport(&spec, mu0, &mu_t)?;
    let certificate = Certificate::new(opt.value, w.value - ct.value, lp_tol(opt.value));

    let b = ot::ballistic_over(&spec, mu0, nu_t)?;
    let bm = ot::ballistic_cost_matrix(&spec, mu0, nu_t)?;
    let (g, h) = max_conjugate_potentials(&bm, &b.source_potential);
    // phi(w) = max_x <w, x> - h(x): the final potential of the dual
    // fixed-end problem; -g is its initial partner.
    let atoms: Vec<(Vec<f64>, f64)> = nu_t.points().iter().cloned().zip(h).collect();
    let phi = |w: &[f64]| atoms.iter().map(|(x, hx)| dot(w, x) - hx).fold(f64::NEG_INFINITY, f64::max);
    let phi_grid = GridFunction::from_fn(w_axes.to_vec(), Convexity::Convex, phi)?;
    let potential_shape = is_convex(&phi_grid, 1e-9 * (1.0 + phi_grid.lipschitz_bound()));
    let dual = mu_t.integrate(phi) + dot(&g, mu0.weights());
    let potential_gap = (ct.value - dual).abs();

    Ok(InterpolationResult {
        value: opt.value,
        intermediate: mu_t,
        pairs,
        certificate,
        ballistic_value: b.value,
        potential_shape,
        potential_gap,
    })
}

/// Max-problem analogue of `ot::conjugate_potentials`: h(x) = max_v
/// cost(v, x) + g(v), then g(v) = min_x h(x) - cost(v, x).
fn max_conjugate_potentials(cost: &CostMatrix, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h: Vec<f64> = (0..cost.cols())
        .map(|j| {
            (0..cost.rows())
                .filter(|&i| !is_sentinel(cost.get(i, j)))
                .map(|i| cost.get(i, j) + g[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let gcc: Vec<f64> = (0..cost.rows())
        .map(|i| {
            (0..cost.cols())
                .filter(|&j| !is_sentinel(cost.get(i, j)))
                .map(|j| h[j] - cost.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    (gcc, h)
}

/// Values of `interpolate_min` over successively refined grids.
pub fn refinement_table(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, window: &[(f64, f64)], spacings: &[f64]) -> Result<Vec<(f64, f64)>> {
    spacings
        .iter()
        .map(|&h| {
            let axes: Vec<Vec<f64>> = window.iter().map(|&(lo, hi)| axis_with_spacing(lo, hi, h)).collect();
            interpolate_min(spec, mu0, nu_t, &axes).map(|r| (h, r.value))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityOptions {
    /// Spacing of the state and covector grids.
    pub spacing: f64,
    pub perturbations: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for DualityOptions {
    fn default() -> Self {
        Self { spacing: 0.01, perturbations: 20, seed: 0, tolerance: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedCandidate {
    pub epsilon: f64,
    pub center: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    /// int V_T d nu_T + int V~_0 d mu_0 against the least ballistic value.
    pub min_certificate: Certificate,
    /// Concavity of the initial value function on the state grid.
    pub initial_shape: ConvexityReport,
    pub perturbed: Vec<PerturbedCandidate>,
    /// Every perturbed objective lies strictly below the ballistic value.
    pub perturbed_below: bool,
    /// Mirror identity for the greatest ballistic value.
    pub max_certificate: Certificate,
    pub state_axes: Vec<Vec<f64>>,
}

impl DualityReport {
    pub fn pass(&self) -> bool {
        self.min_certificate.pass && self.max_certificate.pass && self.perturbed_below && self.initial_shape.convex
    }
}

/// Window containing every optimal intermediate point x - T dH0(v), with a
/// margin.
fn state_window(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<Vec<(f64, f64)>> {
    let h = hamiltonian_of(&spec.lagrangian, spec.dual_axes.as_deref())?;
    let d = mu0.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in mu0.points() {
        let dv = h.d_costate(v).unwrap_or_else(|| vec![0.0; d]);
        for x in nu_t.points().iter().chain(std::iter::once(&vec![0.0; d])) {
            for k in 0..d {
                for y in [x[k] - spec.horizon * dv[k], x[k]] {
                    lo[k] = lo[k].min(y);
                    hi[k] = hi[k].max(y);
                }
            }
        }
    }
    Ok(lo
        .into_iter()
        .zip(hi)
        .map(|(a, b)| {
            let m = 1.0 + 0.25 * (b - a);
            (a - m, b + m)
        })
        .collect())
}

fn covector_window(mu0: &DiscreteMeasure) -> Vec<(f64, f64)> {
    (0..mu0.dim())
        .map(|k| {
            let (a, b) = mu0
                .points()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[k]), b.max(p[k])));
            let m = 1.0 + 0.25 * (b - a);
            (a - m, b + m)
        })
        .collect()
}

fn axes_of(window: &[(f64, f64)], spacing: f64) -> Vec<Vec<f64>> {
    window.iter().map(|&(lo, hi)| axis_with_spacing(lo, hi, spacing)).collect()
}

/// Evaluates int V_T d nu_T + int V~_0 d mu_0 for a concave initial value
/// function `v0`, with V_T its Hopf-Lax evolution and V~_0 its concave
/// conjugate, both optimized over `axes`.
fn dual_objective(spec: &CostSpec, v0: &dyn Fn(&[f64]) -> f64, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, axes: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for (x, wx) in nu_t.points().iter().zip(nu_t.weights()) {
        let err = std::cell::RefCell::new(None);
        let (val, _) = scan_min(
            |y| match costs::fixed_end_cost(spec, y, x) {
                Ok(c) if !is_sentinel(c) => v0(y) + c,
                Ok(_) => SENTINEL,
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    SENTINEL
                }
            },
            axes,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        total += wx * val;
    }
    for (v, wv) in mu0.points().iter().zip(mu0.weights()) {
        let (val, _) = scan_min(|y| dot(v, y) - v0(y), axes);
        total += wv * val;
    }
    Ok(total)
}

/// Numerical form of the duality between the ballistic values and
/// Hopf-Lax value functions, with perturbed concave candidates and the
/// mirror identity for the greatest value.
pub fn duality_check(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, opts: &DualityOptions) -> Result<DualityReport> {
    if mu0.dim() != nu_t.dim() {
        return Err(Error::SizeMismatch(format!("dimensions {} and {}", mu0.dim(), nu_t.dim())));
    }
    let window = state_window(spec, mu0, nu_t)?;
    let axes = axes_of(&window, opts.spacing);
    let spec = with_window(spec, &axes);

    let b = ot::ballistic_under(&spec, mu0, nu_t)?;
    let bm = ot::ballistic_cost_matrix(&spec, mu0, nu_t)?;
    let (g, _) = ot::conjugate_potentials(&bm, &b.source_potential);
    let atoms: Vec<(Vec<f64>, f64)> = mu0.points().iter().cloned().zip(g).collect();
    let v0 = |y: &[f64]| atoms.iter().map(|(v, gv)| dot(v, y) + gv).fold(f64::INFINITY, f64::min);
    let v0_grid = GridFunction::from_fn(axes.clone(), Convexity::Concave, v0)?;
    let initial_shape = is_convex(&v0_grid.neg(), 1e-9 * (1.0 + v0_grid.lipschitz_bound()));
    let lhs = dual_objective(&spec, &v0, mu0, nu_t, &axes)?;
    let min_certificate = Certificate::new(lhs, b.value, opts.tolerance);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut perturbed = Vec::with_capacity(opts.perturbations);
    for _ in 0..opts.perturbations {
        let eps = rng.gen_range(0.05..=0.2);
        let center: Vec<f64> = window.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        let bump = |y: &[f64]| {
            let d: Vec<f64> = y.iter().zip(&center).map(|(a, c)| a - c).collect();
            (1.0 + norm2(&d)).sqrt()
        };
        let vp = |y: &[f64]| v0(y) - eps * bump(y);
        let objective = dual_objective(&spec, &vp, mu0, nu_t, &axes)?;
        perturbed.push(PerturbedCandidate { epsilon: eps, center, objective });
    }
    let perturbed_below = perturbed.iter().all(|p| p.objective < b.value);

    let max_certificate = mirror_check(&spec, mu0, nu_t, opts)?;
    Ok(DualityReport { min_certificate, initial_shape, perturbed, perturbed_below, max_certificate, state_axes: axes })
}

/// int W* d nu_T + int W^ d mu_0 against the greatest ballistic value, where
/// W is the convex conjugate of the final potential and W^ its backward
/// evolution under the dual cost.
fn mirror_check(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, opts: &DualityOptions) -> Result<Certificate> {
    let b = ot::ballistic_over(spec, mu0, nu_t)?;
    let bm = ot::ballistic_cost_matrix(spec, mu0, nu_t)?;
    let (_, h) = max_conjugate_potentials(&bm, &b.source_potential);
    let atoms: Vec<(Vec<f64>, f64)> = nu_t.points().iter().cloned().zip(h).collect();
    let w_fn = |w: &[f64]| atoms.iter().map(|(x, hx)| dot(w, x) - hx).fold(f64::NEG_INFINITY, f64::max);
    let constrained = constrained_dual(spec)?;
    let mut cw = covector_window(mu0);
    // The conjugate back needs every slope of the final potential.
    for (k, c) in cw.iter_mut().enumerate() {
        for (i, (xi, hi)) in atoms.iter().enumerate() {
            for (xj, hj) in atoms.iter().skip(i + 1) {
                let dx = xj[k] - xi[k];
                if dx.abs() > 1e-12 {
                    let s = (hj - hi) / dx;
                    c.0 = c.0.min(s - 1.0);
                    c.1 = c.1.max(s + 1.0);
                }
            }
        }
    }
    let spacing = if constrained { opts.spacing } else { opts.spacing.max(0.05) };
    let w_axes = axes_of(&cw, spacing);
    let mut total = 0.0;
    for (x, wx) in nu_t.points().iter().zip(nu_t.weights()) {
        let (neg, _) = scan_min(|w| w_fn(w) - dot(w, x), &w_axes);
        total += wx * -neg;
    }
    for (v, wv) in mu0.points().iter().zip(mu0.weights()) {
        let val = if constrained {
            let h0 = spec.lagrangian.h0(v);
            w_fn(v) - spec.horizon * h0
        } else {
            let mut best = w_fn(v) - costs::dual_fixed_end_cost(spec, v, v)?;
            for w in grid_points(&w_axes) {
                let ct = costs::dual_fixed_end_cost(spec, v, &w)?;
                if !is_sentinel(ct) {
                    best = best.max(w_fn(&w) - ct);
                }
            }
            best
        };
        total += wv * val;
    }
    Ok(Certificate::new(total, b.value, opts.tolerance))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReverseReport {
    /// C_T(nu_0, nu_T).
    pub transport_value: f64,
    pub concavity: Option<ConvexityReport>,
    /// Initial potential integrated along the sorted support (d = 1).
    pub potential: Option<GridFunction>,
    /// Image of nu_0 under the potential's gradient, when concave.
    pub initial_covectors: Option<DiscreteMeasure>,
    /// C_T against B_T(mu_0, nu_T) - W(nu_0, mu_0).
    pub equality: Option<Certificate>,
    /// Largest B_T(mu, nu_T) - W(nu_0, mu) - C_T over the probes.
    pub worst_probe: f64,
    pub probes: usize,
    pub probe_tolerance: f64,
}

impl ReverseReport {
    pub fn probes_pass(&self) -> bool {
        self.worst_probe <= self.probe_tolerance
    }

    pub fn pass(&self) -> bool {
        self.probes_pass() && self.equality.as_ref().is_none_or(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReverseOptions {
    pub probes: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub probe_tolerance: f64,
}

impl Default for ReverseOptions {
    fn default() -> Self {
        Self { probes: 100, seed: 0, tolerance: 1e-6, probe_tolerance: 1e-9 }
    }
}

/// -d/dy c_T(y, x): closed forms where available, central differences
/// otherwise.
fn minus_dy_cost(spec: &CostSpec, y: f64, x: f64) -> Result<f64> {
    let t = spec.horizon;
    match &spec.lagrangian.kind {
        LagrangianKind::Quadratic { mass } => Ok(mass * (x - y) / t),
        LagrangianKind::StateIndependent { l0: ScalarField::Quadratic { scale } } => Ok(scale * (x - y) / t),
        _ => {
            let h = 1e-5 * (1.0 + y.abs());
            let f = |s: f64| costs::fixed_end_cost(spec, &[s], &[x]);
            Ok(-(f(y + h)? - f(y - h)?) / (2.0 * h))
        }
    }
}

/// Builds an initial covector measure from the optimal fixed-end plan and
/// checks C_T(nu_0, nu_T) = sup over mu of B_T(mu, nu_T) - W(nu_0, mu).
pub fn reverse_interpolate(spec: &CostSpec, nu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, opts: &ReverseOptions) -> Result<ReverseReport> {
    if nu0.dim() != nu_t.dim() {
        return Err(Error::SizeMismatch(format!("dimensions {} and {}", nu0.dim(), nu_t.dim())));
    }
    let c = ot::c_transport(spec, nu0, nu_t)?;
    let d = nu0.dim();
    let (mut concavity, mut potential, mut initial_covectors, mut equality) = (None, None, None, None);

    if d == 1 {
        // Supergradient of the initial potential at each atom, averaged over
        // the plan partners.
        let nu0t = nu0.trimmed();
        let mut slopes = Vec::with_capacity(nu0t.len());
        for y in nu0t.points() {
            let i = nu0.points().iter().position(|p| p == y).expect("trimmed atoms come from nu0");
            let (mut m, mut s) = (0.0, 0.0);
            for j in 0..nu_t.len() {
                let w = c.plan.get(i, j);
                if w > 0.0 {
                    m += w;
                    s += w * minus_dy_cost(spec, y[0], nu_t.points()[j][0])?;
                }
            }
            slopes.push((y[0], s / m));
        }
        slopes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mu0 = if slopes.len() >= 2 {
            let axis: Vec<f64> = slopes.iter().map(|s| s.0).collect();
            let mut vals = vec![0.0; axis.len()];
            for k in 1..axis.len() {
                vals[k] = vals[k - 1] + 0.5 * (slopes[k - 1].1 + slopes[k].1) * (axis[k] - axis[k - 1]);
            }
            let g = GridFunction::new(vec![axis], vals, Convexity::Unknown)?;
            let scale = 1.0 + g.lipschitz_bound() * g.resolution();
            let rep = is_convex(&g.neg(), 1e-9 * scale);
            let ok = rep.convex;
            concavity = Some(rep);
            let mu = if ok {
                // The supergradients themselves: a grid stencil at the hull
                // ends would return a cell average instead.
                let pts: Vec<Vec<f64>> = nu0t
                    .points()
                    .iter()
                    .map(|y| vec![slopes[slopes.iter().position(|s| s.0 == y[0]).expect("atom has a slope")].1])
                    .collect();
                Some(DiscreteMeasure::normalized(pts, nu0t.weights().to_vec(), 1e-9)?)
            } else {
                None
            };
            potential = Some(g);
            mu
        } else {
            Some(DiscreteMeasure::dirac(vec![slopes[0].1]))
        };
        if let Some(mu0) = mu0 {
            let spec_w = with_window(spec, &axes_of(&state_window(spec, &mu0, nu_t)?, 0.01));
            let bv = ot::ballistic_under(&spec_w, &mu0, nu_t)?.value;
            let wv = ot::w_under(nu0, &mu0)?.value;
            equality = Some(Certificate::new(c.value, bv - wv, opts.tolerance * (1.0 + c.value.abs())));
            initial_covectors = Some(mu0);
        }
    }

    // Probes: random covector measures around the slopes of the plan.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for (i, j, _) in c.plan.support() {
        for k in 0..d {
            let s = (nu_t.points()[j][k] - nu0.points()[i][k]) / spec.horizon.max(1e-12);
            lo[k] = lo[k].min(s - 1.0);
            hi[k] = hi[k].max(s + 1.0);
        }
    }
    let probe_spec = with_window(spec, &axes_of(&lo.iter().zip(&hi).map(|(a, b)| (*a, *b)).collect::<Vec<_>>(), 0.05));
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..opts.probes {
        let n = rng.gen_range(1..=6);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|k| rng.gen_range(lo[k]..=hi[k])).collect()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        let mu = DiscreteMeasure::normalized(pts, w.iter().map(|x| x / s).collect(), 1e-9)?;
        let probe_spec = if spec.lagrangian.is_state_independent() {
            spec.clone()
        } else {
            with_window(&probe_spec, &axes_of(&state_window(spec, &mu, nu_t)?, 0.05))
        };
        let bv = ot::ballistic_under(&probe_spec, &mu, nu_t)?.value;
        let wv = ot::w_under(nu0, &mu)?.value;
        worst = worst.max(bv - wv - c.value);
    }
    Ok(ReverseReport {
        transport_value: c.value,
        concavity,
        potential,
        initial_covectors,
        equality,
        worst_probe: if opts.probes == 0 { 0.0 } else { worst },
        probes: opts.probes,
        probe_tolerance: opts.probe_tolerance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapFactorization {
    /// int c0(S(y) - y) d nu_0 for the composed antitone maps S.
    pub integral: f64,
    /// Against C_1.
    pub certificate: Certificate,
    /// |integral - (C_1 + K)|, for comparison with the sign in the value
    /// identity.
    pub offset_by_k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport {
    pub transport_value: f64,
    /// K = int c0* d mu_0.
    pub k: f64,
    pub initial_covectors: DiscreteMeasure,
    /// C_1 + K against W(mu_0, nu_1) - W(nu_0, mu_0).
    pub value_identity: Certificate,
    /// |C_1 - K - (W(mu_0, nu_1) - W(nu_0, mu_0))|: the same identity with
    /// the opposite sign on K.
    pub opposite_sign_residual: f64,
    pub map: std::result::Result<MapFactorization, Error>,
}

impl FactorizationReport {
    pub fn pass(&self) -> bool {
        self.value_identity.pass && self.map.as_ref().map_or(true, |m| m.certificate.pass)
    }
}

/// Checks the factorization of C_1 for the cost c0(x - y) through the
/// reverse construction. `c0` must be convex.
pub fn factorization_check(c0: &ScalarField, nu0: &DiscreteMeasure, nu1: &DiscreteMeasure, tol: f64) -> Result<FactorizationReport> {
    if nu0.dim() != 1 || nu1.dim() != 1 {
        return Err(Error::DimensionUnsupported(nu0.dim().max(nu1.dim())));
    }
    let l = LagrangianSpec::state_independent(c0.clone())?;
    let spec = CostSpec::new(l, 1.0)?;
    let rev = reverse_interpolate(&spec, nu0, nu1, &ReverseOptions { probes: 0, tolerance: tol, ..Default::default() })?;
    let mu0 = rev.initial_covectors.clone().ok_or_else(|| {
        let w = rev.concavity.as_ref().and_then(|c| c.witness.clone()).unwrap_or_default();
        Error::NonConvexInput(format!("initial potential is not concave near {w:?}"))
    })?;
    let c1 = rev.transport_value;
    let k = mu0.integrate(|v| spec.lagrangian.h0(v));
    let wa = ot::w_under(&mu0, nu1)?.value;
    let wb = ot::w_under(nu0, &mu0)?.value;
    let value_identity = Certificate::new(c1 + k, wa - wb, tol * (1.0 + c1.abs() + k.abs()));
    let opposite_sign_residual = (c1 - k - (wa - wb)).abs();

    let map = factorized_maps(c0, nu0, &mu0, nu1).map(|integral| MapFactorization {
        integral,
        certificate: Certificate::new(integral, c1, tol * (1.0 + c1.abs())),
        offset_by_k: (integral - (c1 + k)).abs(),
    });
    Ok(FactorizationReport {
        transport_value: c1,
        k,
        initial_covectors: mu0,
        value_identity,
        opposite_sign_residual,
        map,
    })
}

fn factorized_maps(c0: &ScalarField, nu0: &DiscreteMeasure, mu0: &DiscreteMeasure, nu1: &DiscreteMeasure) -> Result<f64> {
    let nu0 = nu0.trimmed();
    let w0 = nu0.weights()[0];
    if mu0.len() != nu0.len() || nu0.weights().iter().chain(mu0.weights()).any(|w| (w - w0).abs() > 1e-12) {
        return Err(Error::MapUnavailable("initial covectors collapse or weights differ".into()));
    }
    let phi = ot::brenier_map_1d(&nu0, mu0, Sense::Antitone)?;
    let psi = ot::brenier_map_1d(mu0, nu1, Sense::Antitone)?;
    if !phi.single_valued || !psi.single_valued {
        return Err(Error::MapUnavailable("a quantile coupling splits mass".into()));
    }
    let mut total = 0.0;
    for (y, w) in nu0.points().iter().zip(nu0.weights()) {
        let v = phi.apply(y[0]).ok_or_else(|| Error::MapUnavailable(format!("no image for {}", y[0])))?;
        let x = psi.apply(v).ok_or_else(|| Error::MapUnavailable(format!("no image for {v}")))?;
        let c = c0.value_or_inf(&[x - y[0]]);
        if is_sentinel(c) {
            return Err(Error::MapUnavailable(format!("cost infinite at {}", x - y[0])));
        }
        total += w * c;
    }
    Ok(total)
}
