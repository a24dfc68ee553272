//! Dynamic formulation on a 1-D cell grid: density and velocity paths, the
//! discrete continuity residual, the action of a path and the upper bound it
//! gives for the ballistic transport value.
//!
//! Densities are stored as mass per cell. Velocities live on the cell
//! interfaces (`cells + 1` values per time node) and the mass flux across
//! an interface is upwinded. The two outer interfaces never carry flux.

use crate::costs::CostSpec;
use crate::error::{Error, Result};
use crate::grid::is_sentinel;
use crate::interpolation::Certificate;
use crate::lagrangian::LagrangianSpec;
use crate::measure::DiscreteMeasure;
use crate::ot;

const MASS_TOL: f64 = 1e-8;

/// Uniform cells on `[lo, lo + cells * dx]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    lo: f64,
    dx: f64,
    cells: usize,
}

impl CellGrid {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if cells < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid(format!("cell grid [{lo}, {hi}] with {cells} cells")));
        }
        Ok(Self { lo, dx: (hi - lo) / cells as f64, cells })
    }

    /// Largest cell count whose width does not exceed `dx`.
    pub fn with_spacing(lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid(format!("cell width {dx}")));
        }
        Self::new(lo, hi, ((hi - lo) / dx).round().max(2.0) as usize)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.cells as f64 * self.dx
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.dx
    }

    /// Interface `k` sits between cells `k - 1` and `k`.
    pub fn interface(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.dx
    }

    /// Cloud-in-cell deposit: each atom is split between its two nearest
    /// cell centers so that the first moment is kept.
    pub fn rasterize(&self, mu: &DiscreteMeasure) -> Result<Vec<f64>> {
        if mu.dim() != 1 {
            return Err(Error::DimensionUnsupported(mu.dim()));
        }
        let mut mass = vec![0.0; self.cells];
        for (p, &w) in mu.points().iter().zip(mu.weights()) {
            let y = p[0];
            if y < self.lo || y > self.hi() {
                return Err(Error::OutOfDomain(vec![y]));
            }
            let s = (y - self.lo) / self.dx - 0.5;
            if s <= 0.0 {
                mass[0] += w;
            } else if s >= (self.cells - 1) as f64 {
                mass[self.cells - 1] += w;
            } else {
                let i = s.floor() as usize;
                let f = s - i as f64;
                mass[i] += w * (1.0 - f);
                mass[i + 1] += w * f;
            }
        }
        Ok(mass)
    }

}

/// Mass per cell at each time node.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPath {
    times: Vec<f64>,
    grid: CellGrid,
    mass: Vec<Vec<f64>>,
}

impl DensityPath {
    pub fn new(times: Vec<f64>, grid: CellGrid, mass: Vec<Vec<f64>>) -> Result<Self> {
        check_times(&times)?;
        if mass.len() != times.len() {
            return Err(Error::GridMismatch(format!("{} time nodes, {} densities", times.len(), mass.len())));
        }
        for (k, m) in mass.iter().enumerate() {
            if m.len() != grid.cells {
                return Err(Error::GridMismatch(format!("density {k} has {} cells, grid has {}", m.len(), grid.cells)));
            }
            if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidMeasure(format!("density {k} has a negative or non-finite cell")));
            }
            let total: f64 = m.iter().sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidMeasure(format!("density {k} carries mass {total}")));
            }
        }
        Ok(Self { times, grid, mass })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn mass(&self, k: usize) -> &[f64] {
        &self.mass[k]
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Cells with positive mass as atoms at the cell centers.
    pub fn atomized(&self, k: usize) -> Result<DiscreteMeasure> {
        atoms_of(&self.grid, &self.mass[k])
    }

    /// Largest deviation of a per-time total from the initial total.
    pub fn mass_drift(&self) -> f64 {
        let m0: f64 = self.mass[0].iter().sum();
        self.mass.iter().map(|m| (m.iter().sum::<f64>() - m0).abs()).fold(0.0, f64::max)
    }
}

/// Interface velocities at each time node.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityPath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    v_max: f64,
}

impl VelocityPath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>, v_max: f64) -> Result<Self> {
        check_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::GridMismatch(format!("{} time nodes, {} velocity samples", times.len(), values.len())));
        }
        for (k, w) in values.iter().enumerate() {
            if let Some(v) = w.iter().find(|v| !v.is_finite() || v.abs() > v_max) {
                return Err(Error::InvalidGrid(format!("velocity {v} at time node {k} exceeds bound {v_max}")));
            }
        }
        Ok(Self { times, values, v_max })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn max_speed(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Cell-center velocity: mean of the two bounding interfaces.
    fn center(&self, k: usize, i: usize) -> f64 {
        0.5 * (self.values[k][i] + self.values[k][i + 1])
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidGrid("a path needs at least two time nodes".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("time nodes must increase".into()));
    }
    Ok(())
}

fn check_pair(rho: &DensityPath, w: &VelocityPath) -> Result<()> {
    if rho.times.len() != w.times.len() || rho.times.iter().zip(&w.times).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::GridMismatch("density and velocity time nodes differ".into()));
    }
    if w.values.iter().any(|v| v.len() != rho.grid.cells + 1) {
        return Err(Error::GridMismatch(format!("velocities need {} interface values", rho.grid.cells + 1)));
    }
    Ok(())
}

/// Upwind density flux on every interface, zero on the two outer ones.
fn fluxes(density: &[f64], w: &[f64]) -> Vec<f64> {
    let n = density.len();
    let mut f = vec![0.0; n + 1];
    for k in 1..n {
        f[k] = w[k].max(0.0) * density[k - 1] + w[k].min(0.0) * density[k];
    }
    f
}

fn upwind_step(mass: &[f64], w: &[f64], dt: f64, dx: f64) -> Vec<f64> {
    let f = fluxes(mass, w);
    (0..mass.len()).map(|i| (mass[i] - dt / dx * (f[i + 1] - f[i])).max(0.0)).collect()
}

/// Max over space-time cells of |d_t rho + d_x (rho w)|, forward in time
/// with the flux taken at the earlier node. Density units per time.
pub fn continuity_residual(rho: &DensityPath, w: &VelocityPath) -> Result<f64> {
    check_pair(rho, w)?;
    let dx = rho.grid.dx;
    let mut worst = 0.0f64;
    for k in 0..rho.steps() {
        let dt = rho.times[k + 1] - rho.times[k];
        let d0: Vec<f64> = rho.mass[k].iter().map(|m| m / dx).collect();
        let f = fluxes(&d0, &w.values[k]);
        for i in 0..rho.grid.cells {
            let dt_rho = (rho.mass[k + 1][i] - rho.mass[k][i]) / (dx * dt);
            worst = worst.max((dt_rho + (f[i + 1] - f[i]) / dx).abs());
        }
    }
    Ok(worst)
}

/// Time-trapezoid of sum_i L(x_i, w_i) m_i with cell-center velocities.
pub fn action(rho: &DensityPath, w: &VelocityPath, l: &LagrangianSpec) -> Result<f64> {
    check_pair(rho, w)?;
    let mut per_time = Vec::with_capacity(rho.times.len());
    for k in 0..rho.times.len() {
        let mut s = 0.0;
        for (i, &m) in rho.mass[k].iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let x = rho.grid.center(i);
            let v = w.center(k, i);
            let lv = l.value(&[x], &[v]);
            if is_sentinel(lv) || !lv.is_finite() {
                return Err(Error::OutOfDomain(vec![x, v]));
            }
            s += lv * m;
        }
        per_time.push(s);
    }
    Ok(rho.times.windows(2).zip(per_time.windows(2)).map(|(t, a)| 0.5 * (t[1] - t[0]) * (a[0] + a[1])).sum())
}

/// Straight-line particles of the monotone coupling between two 1-D
/// measures: (start, end, mass).
pub fn monotone_particles(nu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> Result<Vec<(f64, f64, f64)>> {
    for m in [nu0, nu_t] {
        if m.dim() != 1 {
            return Err(Error::DimensionUnsupported(m.dim()));
        }
    }
    let a = nu0.sorted_1d();
    let b = nu_t.sorted_1d();
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        if m > 0.0 {
            out.push((a[i].0, b[j].0, m));
        }
        ra -= m;
        rb -= m;
        if ra <= 1e-15 {
            i += 1;
            ra = a.get(i).map_or(0.0, |p| p.1);
        }
        if rb <= 1e-15 {
            j += 1;
            rb = b.get(j).map_or(0.0, |p| p.1);
        }
    }
    Ok(out)
}

/// C1 cubic Hermite interpolant of particle velocities at time `t`,
/// extended linearly for `reach` beyond the outermost particles and
/// constant after that. Coincident particles share their mass-weighted
/// mean velocity.
struct ParticleField {
    z: Vec<f64>,
    v: Vec<f64>,
    slope: Vec<f64>,
    reach: f64,
}

impl ParticleField {
    fn at(particles: &[(f64, f64, f64)], t: f64, horizon: f64) -> Self {
        let mut nodes: Vec<(f64, f64, f64)> = particles
            .iter()
            .map(|&(y, x, m)| (y + t / horizon * (x - y), (x - y) / horizon, m))
            .collect();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64, f64)> = Vec::new();
        for (z, v, m) in nodes {
            match merged.last_mut() {
                Some(last) if (z - last.0).abs() <= 1e-12 => {
                    last.1 = (last.1 * last.2 + v * m) / (last.2 + m);
                    last.2 += m;
                }
                _ => merged.push((z, v, m)),
            }
        }
        let z: Vec<f64> = merged.iter().map(|n| n.0).collect();
        let v: Vec<f64> = merged.iter().map(|n| n.1).collect();
        let n = z.len();
        let d: Vec<f64> = (1..n).map(|k| (v[k] - v[k - 1]) / (z[k] - z[k - 1])).collect();
        let slope: Vec<f64> = (0..n)
            .map(|k| match (k, n) {
                (_, 1) => 0.0,
                (0, _) => d[0],
                (k, n) if k == n - 1 => d[k - 1],
                _ => {
                    let (h0, h1) = (z[k] - z[k - 1], z[k + 1] - z[k]);
                    (d[k - 1] * h1 + d[k] * h0) / (h0 + h1)
                }
            })
            .collect();
        let reach = z.windows(2).map(|w| w[1] - w[0]).fold(1.0, f64::max);
        Self { z, v, slope, reach }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.z.len();
        if x <= self.z[0] {
            return self.v[0] + self.slope[0] * (x - self.z[0]).max(-self.reach);
        }
        if x >= self.z[n - 1] {
            return self.v[n - 1] + self.slope[n - 1] * (x - self.z[n - 1]).min(self.reach);
        }
        let k = self.z.partition_point(|z| *z <= x);
        let h = self.z[k] - self.z[k - 1];
        let s = (x - self.z[k - 1]) / h;
        let (h00, h10, h01, h11) =
            (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s, -2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        h00 * self.v[k - 1] + h10 * h * self.slope[k - 1] + h01 * self.v[k] + h11 * h * self.slope[k]
    }
}

/// Fewest time steps keeping the upwind update stable for speed `v_max`.
pub fn min_steps(v_max: f64, horizon: f64, dx: f64) -> usize {
    (v_max * horizon / dx).ceil().max(1.0) as usize
}

fn evolve(
    grid: &CellGrid,
    initial: Vec<f64>,
    horizon: f64,
    steps: usize,
    mut velocity: impl FnMut(f64) -> Vec<f64>,
    v_max: f64,
) -> Result<(DensityPath, VelocityPath)> {
    if steps < 1 {
        return Err(Error::InvalidGrid("at least one time step".into()));
    }
    let dt = horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let mut mass = vec![initial];
    let mut vel = Vec::with_capacity(steps + 1);
    for (k, &t) in times.iter().enumerate() {
        let w = velocity(t);
        let speed = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if speed * dt > grid.dx * (1.0 + 1e-12) {
            return Err(Error::InvalidGrid(format!(
                "{steps} steps violate the stability limit; need {}",
                min_steps(speed, horizon, grid.dx)
            )));
        }
        if k < steps {
            let next = upwind_step(&mass[k], &w, dt, grid.dx);
            mass.push(next);
        }
        vel.push(w);
    }
    // The clamp in the update only removes roundoff.
    for m in mass.iter_mut() {
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= s);
    }
    let rho = DensityPath::new(times.clone(), grid.clone(), mass)?;
    let observed = vel.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let w = VelocityPath::new(times, vel, if v_max.is_finite() { v_max } else { observed })?;
    Ok((rho, w))
}

/// Path carrying `nu0` to `nu_t` along the straight lines of the monotone
/// coupling. The initial raster is advanced by the upwind scheme under the
/// Eulerian velocity of those lines, so the result solves the discrete
/// continuity equation exactly.
pub fn displacement_path(
    nu0: &DiscreteMeasure,
    nu_t: &DiscreteMeasure,
    horizon: f64,
    steps: usize,
    grid: &CellGrid,
) -> Result<(DensityPath, VelocityPath)> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidGrid(format!("horizon {horizon}")));
    }
    let particles = monotone_particles(nu0, nu_t)?;
    for &(y, x, _) in &particles {
        for z in [y, x] {
            if z < grid.lo || z > grid.hi() {
                return Err(Error::OutOfDomain(vec![z]));
            }
        }
    }
    let initial = grid.rasterize(nu0)?;
    evolve(
        grid,
        initial,
        horizon,
        steps,
        |t| {
            let field = ParticleField::at(&particles, t, horizon);
            (0..=grid.cells).map(|k| field.eval(grid.interface(k))).collect()
        },
        f64::INFINITY,
    )
}

/// Largest speed of the displacement field on the grid interfaces,
/// sampled at `samples + 1` equispaced times.
pub fn displacement_speed(nu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, horizon: f64, grid: &CellGrid, samples: usize) -> Result<f64> {
    let particles = monotone_particles(nu0, nu_t)?;
    let mut top = 0.0f64;
    for k in 0..=samples {
        let field = ParticleField::at(&particles, horizon * k as f64 / samples.max(1) as f64, horizon);
        for i in 0..=grid.cells {
            top = top.max(field.eval(grid.interface(i)).abs());
        }
    }
    Ok(top)
}

/// Re-evolves the initial density of `rho` under `w + amplitude * sin(x)`.
pub fn perturbed_path(rho: &DensityPath, w: &VelocityPath, amplitude: f64) -> Result<(DensityPath, VelocityPath)> {
    check_pair(rho, w)?;
    let grid = rho.grid.clone();
    let steps = rho.steps();
    let horizon = rho.horizon();
    let v_max = w.max_speed() + amplitude.abs();
    let mut k = 0;
    evolve(
        &grid,
        rho.mass[0].clone(),
        horizon,
        steps,
        |_| {
            let out = (0..=grid.cells).map(|i| w.values[k][i] + amplitude * grid.interface(i).sin()).collect();
            k += 1;
            out
        },
        v_max,
    )
}

/// Cells with mass above roundoff become atoms; neighbouring cells are
/// merged into mass-weighted centroids while the count exceeds the
/// transport solver limit.
fn atoms_of(grid: &CellGrid, mass: &[f64]) -> Result<DiscreteMeasure> {
    let mut atoms: Vec<(f64, f64)> =
        mass.iter().enumerate().filter(|(_, m)| **m > 1e-14).map(|(i, m)| (grid.center(i), *m)).collect();
    while atoms.len() > ot::MAX_SUPPORT {
        atoms = atoms
            .chunks(2)
            .map(|c| {
                let m: f64 = c.iter().map(|a| a.1).sum();
                (c.iter().map(|a| a.0 * a.1).sum::<f64>() / m, m)
            })
            .collect();
    }
    let (xs, ws): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
    DiscreteMeasure::normalized(xs.into_iter().map(|x| vec![x]).collect(), ws, 1e-6)
}

/// Integral of |F_a - F_b| for two 1-D measures.
pub fn wasserstein1_1d(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(Error::DimensionUnsupported(a.dim().max(b.dim())));
    }
    let mut ev: Vec<(f64, f64)> = a.sorted_1d();
    ev.extend(b.sorted_1d().into_iter().map(|(x, w)| (x, -w)));
    ev.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cdf = 0.0;
    let mut total = 0.0;
    for w in ev.windows(2) {
        cdf += w[0].1;
        total += cdf.abs() * (w[1].0 - w[0].0);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerianOptions {
    /// Admissible continuity residual; `None` means ten cell widths.
    pub feasibility_tol: Option<f64>,
    /// Admissible W1 distance between the terminal density and the target.
    pub nu_t_tol: f64,
    /// Slack allowed in the upper bound.
    pub tolerance: f64,
}

impl Default for EulerianOptions {
    fn default() -> Self {
        Self { feasibility_tol: None, nu_t_tol: 0.1, tolerance: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundReport {
    pub residual: f64,
    pub feasibility_tol: f64,
    pub terminal_distance: f64,
    pub nu_t_tol: f64,
    /// Bilinear value between the covector measure and the initial density.
    pub initial_value: f64,
    pub action: f64,
    /// Ballistic value against the atomized terminal density.
    pub ballistic_value: f64,
    /// lhs = initial value + action, rhs = ballistic value; passes when
    /// lhs >= rhs - tolerance.
    pub certificate: Certificate,
    pub margin: f64,
}

/// Checks that a feasible path prices at least the ballistic value.
pub fn eulerian_upper_bound_check(
    spec: &CostSpec,
    mu0: &DiscreteMeasure,
    nu_t: &DiscreteMeasure,
    rho: &DensityPath,
    w: &VelocityPath,
    opts: &EulerianOptions,
) -> Result<UpperBoundReport> {
    let residual = continuity_residual(rho, w)?;
    let feasibility_tol = opts.feasibility_tol.unwrap_or(10.0 * rho.grid.dx);
    if residual > feasibility_tol {
        return Err(Error::InfeasiblePath(format!("continuity residual {residual:.3e} above {feasibility_tol:.3e}")));
    }
    let rho0 = rho.atomized(0)?;
    let rho_t = rho.atomized(rho.steps())?;
    let terminal_distance = wasserstein1_1d(&rho_t, nu_t)?;
    if terminal_distance > opts.nu_t_tol {
        return Err(Error::InfeasiblePath(format!(
            "terminal density is {terminal_distance:.3e} from the target, above {:.3e}",
            opts.nu_t_tol
        )));
    }
    let spec = spec.with_horizon(rho.horizon());
    let initial_value = ot::w_under(mu0, &rho0)?.value;
    let a = action(rho, w, &spec.lagrangian)?;
    let ballistic_value = ot::ballistic_under(&spec, mu0, &rho_t)?.value;
    let lhs = initial_value + a;
    let certificate = Certificate::at_most(ballistic_value, lhs, opts.tolerance);
    let certificate = Certificate { lhs, rhs: ballistic_value, ..certificate };
    Ok(UpperBoundReport {
        residual,
        feasibility_tol,
        terminal_distance,
        nu_t_tol: opts.nu_t_tol,
        initial_value,
        action: a,
        ballistic_value,
        certificate,
        margin: lhs - ballistic_value,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub dx: f64,
    pub dt: f64,
    pub action: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub reference: f64,
    pub rows: Vec<RefinementRow>,
    /// log2 of successive error ratios.
    pub rates: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Action of displacement paths on successively halved cells and time
/// steps, against the static fixed-end value.
pub fn displacement_convergence(
    spec: &CostSpec,
    nu0: &DiscreteMeasure,
    nu_t: &DiscreteMeasure,
    window: (f64, f64),
    dx: f64,
    levels: usize,
) -> Result<ConvergenceReport> {
    let reference = ot::c_transport(spec, nu0, nu_t)?.value;
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let h = dx / (1u64 << level) as f64;
        let grid = CellGrid::with_spacing(window.0, window.1, h)?;
        // Courant number at most one half at every level.
        let v_max = displacement_speed(nu0, nu_t, spec.horizon, &grid, 64)?;
        let steps = 2 * min_steps(1.05 * v_max, spec.horizon, grid.dx());
        let (rho, w) = displacement_path(nu0, nu_t, spec.horizon, steps, &grid)?;
        let a = action(&rho, &w, &spec.lagrangian)?;
        rows.push(RefinementRow { dx: grid.dx(), dt: spec.horizon / steps as f64, action: a, error: (a - reference).abs() });
    }
    let rates = rows.windows(2).map(|r| (r[0].error / r[1].error).log2()).collect();
    Ok(ConvergenceReport { reference, rows, rates })
}
