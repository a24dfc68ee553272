//! Hamiltonian flows of separable Hamiltonians and the transport maps they
//! generate from potentials.

use crate::costs::{self, CostSpec};
use crate::error::{Error, Result};
use crate::field::{norm2, ScalarField};
use crate::grid::{concave_conjugate, grid_gradient, GridFunction};
use crate::lagrangian::{hamiltonian_of, HamiltonianSpec};
use crate::measure::DiscreteMeasure;
use crate::ot::{self, TransportPlan};

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub costates: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn final_costate(&self) -> &[f64] {
        self.costates.last().expect("trajectories are never empty")
    }

    /// max_t |H(t) - H(0)|.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// Stormer-Verlet for p' = -dV/dx, x' = dT/dp with kick-drift-kick
/// splitting. `force` returns -dV/dx and `drift` returns dT/dp.
fn verlet(
    x0: &[f64],
    p0: &[f64],
    horizon: f64,
    steps: usize,
    force: impl Fn(&[f64]) -> Option<Vec<f64>>,
    drift: impl Fn(&[f64]) -> Option<Vec<f64>>,
    energy: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<Trajectory> {
    let dt = horizon / steps as f64;
    let mut x = x0.to_vec();
    let mut p = p0.to_vec();
    let mut tr = Trajectory {
        times: vec![0.0],
        states: vec![x.clone()],
        costates: vec![p.clone()],
        energies: vec![energy(&x, &p)],
    };
    let finite = |v: &Option<Vec<f64>>| v.as_ref().is_some_and(|v| v.iter().all(|c| c.is_finite()));
    let mut f = force(&x);
    for k in 0..steps {
        if !finite(&f) {
            return Err(Error::StepUnderflow(k));
        }
        let fx = f.as_ref().expect("checked above");
        for (pi, fi) in p.iter_mut().zip(fx) {
            *pi += 0.5 * dt * fi;
        }
        let dv = drift(&p);
        if !finite(&dv) {
            return Err(Error::StepUnderflow(k));
        }
        for (xi, di) in x.iter_mut().zip(dv.expect("checked above")) {
            *xi += dt * di;
        }
        f = force(&x);
        if !finite(&f) {
            return Err(Error::StepUnderflow(k));
        }
        for (pi, fi) in p.iter_mut().zip(f.as_ref().expect("checked above")) {
            *pi += 0.5 * dt * fi;
        }
        tr.times.push(if k + 1 == steps { horizon } else { dt * (k + 1) as f64 });
        tr.states.push(x.clone());
        tr.costates.push(p.clone());
        tr.energies.push(energy(&x, &p));
    }
    Ok(tr)
}

/// Integrates x' = dH/dq, q' = -dH/dx from (x0, v0) over [0, T]. Free
/// motion with a quadratic kinetic energy is evaluated in closed form.
pub fn flow(h: &HamiltonianSpec, x0: &[f64], v0: &[f64], horizon: f64, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidGrid("flow needs at least one step".into()));
    }
    if x0.len() != v0.len() {
        return Err(Error::SizeMismatch("state and costate dimensions differ".into()));
    }
    if let Some(inv_mass) = h.free_inverse_mass() {
        let e = h.value(x0, v0);
        let times: Vec<f64> = (0..=steps)
            .map(|k| if k == steps { horizon } else { horizon * k as f64 / steps as f64 })
            .collect();
        let states = times
            .iter()
            .map(|t| x0.iter().zip(v0).map(|(x, v)| x + t * v * inv_mass).collect())
            .collect();
        return Ok(Trajectory {
            costates: vec![v0.to_vec(); times.len()],
            energies: vec![e; times.len()],
            times,
            states,
        });
    }
    verlet(
        x0,
        v0,
        horizon,
        steps,
        |x| h.d_state(x).map(|g| g.into_iter().map(|v| -v).collect()),
        |q| h.d_costate(q),
        |x, q| h.value(x, q),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMethod {
    FlowFromPotential,
    LpSupport,
}

/// Orientation of the flow on the covector phase space used for the
/// greatest-value map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxConvention {
    /// Flow of (eta, xi) -> -H(xi, eta).
    Conjugate,
    /// Flow of (eta, xi) -> H(xi, eta).
    Reversed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportMapSample {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub method: MapMethod,
    pub convention: Option<MaxConvention>,
}

const FLOW_STEPS: usize = 2000;

/// x(T) of the flow started at (dk~(v), v) for each sample covector v,
/// where k~ is a concave function on covectors.
pub fn map_from_covector_potential(spec: &CostSpec, k_tilde: &GridFunction, samples: &[Vec<f64>]) -> Result<TransportMapSample> {
    let h = hamiltonian_of(&spec.lagrangian, spec.dual_axes.as_deref())?;
    let mut outputs = Vec::with_capacity(samples.len());
    for v in samples {
        let y = grid_gradient(k_tilde, v)?;
        let x = if spec.horizon == 0.0 {
            y
        } else {
            flow(&h, &y, v, spec.horizon, FLOW_STEPS)?.final_state().to_vec()
        };
        outputs.push(x);
    }
    Ok(TransportMapSample {
        inputs: samples.to_vec(),
        outputs,
        method: MapMethod::FlowFromPotential,
        convention: None,
    })
}

/// Map generated by a concave potential `k` on states: its concave
/// conjugate is sampled on `covector_axes` and differentiated at each
/// sample covector, and the flow carries the pair to time T.
pub fn map_from_concave_potential(spec: &CostSpec, k: &GridFunction, covector_axes: &[Vec<f64>], samples: &[Vec<f64>]) -> Result<TransportMapSample> {
    let k_tilde = concave_conjugate(k, covector_axes)?;
    map_from_covector_potential(spec, &k_tilde, samples)
}

/// The LP-optimal plan read as a map: each source atom goes to the
/// mass-weighted mean of its targets.
pub fn map_from_plan(plan: &TransportPlan, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure) -> TransportMapSample {
    let d = nu_t.dim();
    let outputs = (0..plan.rows())
        .map(|i| {
            let mut acc = vec![0.0; d];
            let mut m = 0.0;
            for j in 0..plan.cols() {
                let w = plan.get(i, j);
                m += w;
                for k in 0..d {
                    acc[k] += w * nu_t.points()[j][k];
                }
            }
            acc.into_iter().map(|a| if m > 0.0 { a / m } else { a }).collect()
        })
        .collect();
    TransportMapSample {
        inputs: mu0.points().to_vec(),
        outputs,
        method: MapMethod::LpSupport,
        convention: None,
    }
}

/// Covector potential k~(v) = -max_j (h_j - b_T(v, x_j)) sampled on
/// `covector_axes`, from potentials of `plan` with strict slack off its
/// support. Its gradient at each source atom is the starting point of
/// the optimal trajectory.
pub fn ballistic_covector_potential(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, plan: &TransportPlan, covector_axes: &[Vec<f64>]) -> Result<GridFunction> {
    let cost = ot::ballistic_cost_matrix(spec, mu0, nu_t)?;
    let (_, h, _) = ot::strict_dual_potentials(&cost, plan)
        .ok_or_else(|| Error::NonConvexInput("plan is not optimal for the ballistic cost".into()))?;
    let err = std::cell::RefCell::new(None);
    let f = GridFunction::from_fn(covector_axes.to_vec(), crate::grid::Convexity::Concave, |v| {
        let mut best = f64::NEG_INFINITY;
        for (x, hx) in nu_t.points().iter().zip(&h) {
            match costs::ballistic_cost(spec, v, x) {
                Ok(b) => best = best.max(hx - b),
                Err(e) => *err.borrow_mut() = Some(e),
            }
        }
        -best
    })?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(f),
    }
}

/// Plan mass whose target lies farther than `radius` from the image of its
/// source under `map`. `map.outputs[i]` must be the image of source atom i.
pub fn verify_support(plan: &TransportPlan, targets: &[Vec<f64>], map: &TransportMapSample, radius: f64) -> f64 {
    let mut off = 0.0;
    for (i, j, m) in plan.support() {
        let Some(y) = map.outputs.get(i) else {
            off += m;
            continue;
        };
        let d: Vec<f64> = y.iter().zip(&targets[j]).map(|(a, b)| a - b).collect();
        if norm2(&d).sqrt() > radius {
            off += m;
        }
    }
    off
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryCheck {
    /// -d/dy c_T(y, x).
    pub initial_costate: Vec<f64>,
    /// d/dx c_T(y, x).
    pub final_costate: Vec<f64>,
    pub arrival_state: Vec<f64>,
    pub arrival_costate: Vec<f64>,
    /// Distance between (x, w) and the end of the flow.
    pub error: f64,
    pub pass: bool,
}

fn fd_gradient(f: impl Fn(&[f64]) -> Result<f64>, at: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(at.len());
    for k in 0..at.len() {
        let mut a = at.to_vec();
        let mut b = at.to_vec();
        a[k] += h;
        b[k] -= h;
        g.push((f(&a)? - f(&b)?) / (2.0 * h));
    }
    Ok(g)
}

/// Reads the costates off the cost gradients and checks that the flow from
/// (y, v) arrives at (x, w).
pub fn trajectory_optimality_check(spec: &CostSpec, y: &[f64], x: &[f64], step: f64, tol: f64) -> Result<TrajectoryCheck> {
    let h = hamiltonian_of(&spec.lagrangian, spec.dual_axes.as_deref())?;
    let v: Vec<f64> = fd_gradient(|s| costs::fixed_end_cost(spec, s, x), y, step)?.into_iter().map(|c| -c).collect();
    let w = fd_gradient(|s| costs::fixed_end_cost(spec, y, s), x, step)?;
    let tr = flow(&h, y, &v, spec.horizon, FLOW_STEPS)?;
    let dx: Vec<f64> = tr.final_state().iter().zip(x).map(|(a, b)| a - b).collect();
    let dw: Vec<f64> = tr.final_costate().iter().zip(&w).map(|(a, b)| a - b).collect();
    let error = (norm2(&dx) + norm2(&dw)).sqrt();
    Ok(TrajectoryCheck {
        arrival_state: tr.final_state().to_vec(),
        arrival_costate: tr.final_costate().to_vec(),
        initial_costate: v,
        final_costate: w,
        error,
        pass: error <= tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistReport {
    /// Pairs (i, j) of distinct targets with indistinguishable gradients.
    pub collisions: Vec<(usize, usize)>,
    /// Targets where the gradient was not stable across step sizes.
    pub unstable: Vec<usize>,
    pub pass: bool,
}

/// Flags distinct targets x, x' whose gradients d/dy c_T(y, .) agree within
/// `tol`. Targets whose finite-difference gradient oscillates by more than
/// `tol` over three step sizes are set aside rather than compared.
pub fn check_twist(spec: &CostSpec, y: &[f64], targets: &[Vec<f64>], tol: f64) -> Result<TwistReport> {
    let mut grads: Vec<Option<Vec<f64>>> = Vec::with_capacity(targets.len());
    let mut unstable = Vec::new();
    for (i, x) in targets.iter().enumerate() {
        let f = |s: &[f64]| costs::fixed_end_cost(spec, s, x);
        let gs: Vec<Vec<f64>> = [1e-4, 5e-5, 2.5e-5]
            .iter()
            .map(|&h| fd_gradient(f, y, h))
            .collect::<Result<_>>()?;
        let spread = gs
            .iter()
            .skip(1)
            .map(|g| norm2(&g.iter().zip(&gs[0]).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt())
            .fold(0.0, f64::max);
        if spread > tol || gs[0].iter().any(|c| !c.is_finite()) {
            unstable.push(i);
            grads.push(None);
        } else {
            grads.push(Some(gs[0].clone()));
        }
    }
    let mut collisions = Vec::new();
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            if targets[i] == targets[j] {
                continue;
            }
            if let (Some(a), Some(b)) = (&grads[i], &grads[j]) {
                let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
                if norm2(&d).sqrt() <= tol {
                    collisions.push((i, j));
                }
            }
        }
    }
    Ok(TwistReport { pass: collisions.is_empty(), collisions, unstable })
}

fn even_potential(u: &ScalarField) -> bool {
    match u {
        ScalarField::Quadratic { .. } => true,
        ScalarField::Grid(g) => g.points().iter().all(|p| {
            let q: Vec<f64> = p.iter().map(|c| -c).collect();
            let (a, b) = (g.eval(p), g.eval(&q));
            crate::grid::is_sentinel(b) || (a - b).abs() <= 1e-9 * (1.0 + a.abs())
        }),
    }
}

/// Map for the greatest ballistic value: start on the covector phase space
/// at (v, dh(v)) and return the state component after time T. With the
/// Conjugate convention the covector moves by dU(xi) and the state by
/// dH0(eta).
pub fn map_for_ballistic_max(spec: &CostSpec, h: &GridFunction, samples: &[Vec<f64>], convention: MaxConvention) -> Result<TransportMapSample> {
    let ham = hamiltonian_of(&spec.lagrangian, spec.dual_axes.as_deref())?;
    if let Some(u) = &ham.potential {
        if !even_potential(u) {
            return Err(Error::VariantUnsupported("greatest-value maps need an even potential".into()));
        }
    }
    let sign = match convention {
        MaxConvention::Conjugate => 1.0,
        MaxConvention::Reversed => -1.0,
    };
    let grad_u = |xi: &[f64]| -> Option<Vec<f64>> {
        match &ham.potential {
            Some(u) => u.gradient(xi).map(|g| g.into_iter().map(|c| sign * c).collect()),
            None => Some(vec![0.0; xi.len()]),
        }
    };
    let grad_h0 = |eta: &[f64]| ham.d_costate(eta).map(|g| g.into_iter().map(|c| sign * c).collect::<Vec<_>>());
    let mut outputs = Vec::with_capacity(samples.len());
    for v in samples {
        let xi0 = grid_gradient(h, v)?;
        // Position eta (covector), momentum xi (state): eta' = sign dU(xi),
        // xi' = sign dH0(eta).
        let tr = verlet(v, &xi0, spec.horizon, FLOW_STEPS, |eta| grad_h0(eta), |xi| grad_u(xi), |eta, xi| {
            sign * (ham.potential.as_ref().map_or(0.0, |u| u.value(xi)) - ham.kinetic.value(eta))
        })?;
        outputs.push(tr.final_costate().to_vec());
    }
    Ok(TransportMapSample {
        inputs: samples.to_vec(),
        outputs,
        method: MapMethod::FlowFromPotential,
        convention: Some(convention),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConventionReport {
    pub chosen: Option<MaxConvention>,
    /// (convention, mass off the graph of the LP plan).
    pub trials: Vec<(MaxConvention, f64)>,
}

/// Runs both conventions against an LP-optimal plan for the greatest value
/// and keeps the one whose map carries the plan.
pub fn resolve_max_convention(
    spec: &CostSpec,
    h: &GridFunction,
    mu0: &DiscreteMeasure,
    nu_t: &DiscreteMeasure,
    plan: &TransportPlan,
    radius: f64,
) -> Result<ConventionReport> {
    let mut trials = Vec::new();
    for c in [MaxConvention::Conjugate, MaxConvention::Reversed] {
        let map = map_for_ballistic_max(spec, h, mu0.points(), c)?;
        trials.push((c, verify_support(plan, nu_t.points(), &map, radius)));
    }
    let chosen = trials
        .iter()
        .filter(|t| t.1 <= 1e-8)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|t| t.0);
    Ok(ConventionReport { chosen, trials })
}

/// Covector potential -g(v) = max_j b_T(v, x_j) - h_j for the greatest
/// value, with strict slack off the plan's support.
pub fn ballistic_max_potential(spec: &CostSpec, mu0: &DiscreteMeasure, nu_t: &DiscreteMeasure, plan: &TransportPlan, covector_axes: &[Vec<f64>]) -> Result<GridFunction> {
    let cost = ot::ballistic_cost_matrix(spec, mu0, nu_t)?;
    let neg = ot::CostMatrix::new(cost.rows(), cost.cols(), cost.entries().iter().map(|c| -c).collect(), ot::CostKind::Custom)?;
    let (_, h, _) = ot::strict_dual_potentials(&neg, plan)
        .ok_or_else(|| Error::NonConvexInput("plan is not optimal for the ballistic cost".into()))?;
    // Potentials of the negated problem; the max-problem h is their negative.
    let err = std::cell::RefCell::new(None);
    let f = GridFunction::from_fn(covector_axes.to_vec(), crate::grid::Convexity::Unknown, |v| {
        let mut best = f64::NEG_INFINITY;
        for (x, hx) in nu_t.points().iter().zip(&h) {
            match costs::ballistic_cost(spec, v, x) {
                Ok(b) => best = best.max(b + hx),
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
