//! Convex Lagrangians L(x, p), their Hamiltonians and dual Lagrangians, and
//! sampled checks of the standing growth and convexity hypotheses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{dot, norm2, ScalarField};
use crate::grid::{self, conjugate_at, is_convex, legendre_conjugate, Convexity, GridFunction, SENTINEL};

/// Constants of the growth hypotheses: `dist(0, F(x)) <= rho (1 + |x|)` and
/// `L(x, p) >= theta(max(0, |p| - alpha |x|)) - beta |x|`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionParams {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Non-decreasing minorant on [0, R]; linearly extended past R.
    pub theta: GridFunction,
}

impl AssumptionParams {
    pub fn new(rho: f64, alpha: f64, beta: f64, theta: GridFunction) -> Result<Self> {
        if rho < 0.0 || alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidGrid("rho, alpha, beta must be non-negative".into()));
        }
        if theta.dim() != 1 || theta.axes()[0][0] < 0.0 {
            return Err(Error::InvalidGrid("theta must be sampled on [0, R]".into()));
        }
        if theta.values().windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidGrid("theta must be non-decreasing".into()));
        }
        Ok(Self { rho, alpha, beta, theta })
    }

    /// theta(r) = r^2 / 2 on [0, r_max] and zero constants.
    pub fn quadratic_growth(r_max: f64) -> Self {
        let theta = GridFunction::from_fn(vec![grid::linspace(0.0, r_max, 401)], Convexity::Convex, |r| {
            0.5 * r[0] * r[0]
        })
        .expect("valid axis");
        Self::new(0.0, 0.0, 0.0, theta).expect("valid params")
    }

    pub fn theta_at(&self, r: f64) -> f64 {
        let ax = &self.theta.axes()[0];
        let v = self.theta.values();
        let n = ax.len();
        if r <= ax[0] {
            v[0]
        } else if r >= ax[n - 1] {
            let slope = (v[n - 1] - v[n - 2]) / (ax[n - 1] - ax[n - 2]);
            v[n - 1] + slope * (r - ax[n - 1])
        } else {
            self.theta.eval(&[r])
        }
    }

    /// Heuristic superlinearity flag: the last slope exceeds the first and
    /// the last value exceeds the first-slope extrapolation.
    pub fn theta_superlinear(&self) -> bool {
        let ax = &self.theta.axes()[0];
        let v = self.theta.values();
        let n = ax.len();
        let first = (v[1] - v[0]) / (ax[1] - ax[0]);
        let last = (v[n - 1] - v[n - 2]) / (ax[n - 1] - ax[n - 2]);
        last > first && v[n - 1] > v[0] + first * (ax[n - 1] - ax[0])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LagrangianKind {
    /// L(x, p) = m |p|^2 / 2.
    Quadratic { mass: f64 },
    /// L(x, p) = L0(p).
    StateIndependent { l0: ScalarField },
    /// L(x, p) = L0(p) + U(x) with U convex.
    SeparableConvex { l0: ScalarField, potential: ScalarField },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSpec {
    pub kind: LagrangianKind,
    pub params: AssumptionParams,
}

fn check_kinetic(l0: &ScalarField) -> Result<()> {
    match l0 {
        ScalarField::Quadratic { scale } if *scale > 0.0 => Ok(()),
        ScalarField::Quadratic { .. } => Err(Error::NonConvexInput("kinetic term needs a positive scale".into())),
        ScalarField::Grid(g) => {
            if g.flag() != Convexity::Convex {
                return Err(Error::NonConvexInput("sampled kinetic term is not flagged convex".into()));
            }
            if g.argmin().is_none() {
                return Err(Error::NonConvexInput("kinetic term is infinite everywhere".into()));
            }
            Ok(())
        }
    }
}

impl LagrangianSpec {
    pub fn quadratic(mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::NonConvexInput(format!("mass must be positive, got {mass}")));
        }
        Ok(Self {
            kind: LagrangianKind::Quadratic { mass },
            params: AssumptionParams::quadratic_growth(20.0),
        })
    }

    pub fn state_independent(l0: ScalarField) -> Result<Self> {
        check_kinetic(&l0)?;
        Ok(Self {
            kind: LagrangianKind::StateIndependent { l0 },
            params: AssumptionParams::quadratic_growth(20.0),
        })
    }

    pub fn separable(l0: ScalarField, potential: ScalarField) -> Result<Self> {
        check_kinetic(&l0)?;
        if !potential.is_convex_flagged() {
            return Err(Error::NonConvexInput("potential is not flagged convex".into()));
        }
        Ok(Self {
            kind: LagrangianKind::SeparableConvex { l0, potential },
            params: AssumptionParams::quadratic_growth(20.0),
        })
    }

    pub fn with_params(mut self, params: AssumptionParams) -> Self {
        self.params = params;
        self
    }

    /// Kinetic part L0 as a field.
    pub fn kinetic(&self) -> ScalarField {
        match &self.kind {
            LagrangianKind::Quadratic { mass } => ScalarField::Quadratic { scale: *mass },
            LagrangianKind::StateIndependent { l0 } | LagrangianKind::SeparableConvex { l0, .. } => l0.clone(),
        }
    }

    pub fn potential(&self) -> Option<&ScalarField> {
        match &self.kind {
            LagrangianKind::SeparableConvex { potential, .. } => Some(potential),
            _ => None,
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self.kind {
            LagrangianKind::Quadratic { mass } => Some(mass),
            LagrangianKind::StateIndependent { l0: ScalarField::Quadratic { scale } } => Some(scale),
            _ => None,
        }
    }

    pub fn is_state_independent(&self) -> bool {
        !matches!(self.kind, LagrangianKind::SeparableConvex { .. })
    }

    /// Dimension fixed by sampled components, if any.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            LagrangianKind::Quadratic { .. } => None,
            LagrangianKind::StateIndependent { l0 } => l0.dim(),
            LagrangianKind::SeparableConvex { l0, potential } => l0.dim().or(potential.dim()),
        }
    }

    pub fn value(&self, x: &[f64], p: &[f64]) -> f64 {
        let k = self.kinetic().value_or_inf(p);
        match self.potential() {
            Some(u) => grid::add(k, u.value_or_inf(x)),
            None => k,
        }
    }

    /// H0(q) = sup_p <q, p> - L0(p), in closed form or by exhaustive scan
    /// over the samples of L0.
    pub fn h0(&self, q: &[f64]) -> f64 {
        match self.kinetic() {
            ScalarField::Quadratic { scale } => norm2(q) / (2.0 * scale),
            ScalarField::Grid(g) => conjugate_at(&g, q).map(|r| r.0).unwrap_or(SENTINEL),
        }
    }
}

/// H(x, q) = H0(q) - U(x).
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub kinetic: ScalarField,
    pub potential: Option<ScalarField>,
    /// max |L0** - L0| over the finite samples of a sampled L0 (0 for
    /// closed forms).
    pub biconjugate_error: f64,
}

impl HamiltonianSpec {
    /// Separable Hamiltonian built directly, without a Lagrangian behind it.
    pub fn separable(kinetic: ScalarField, potential: Option<ScalarField>) -> Self {
        Self { kinetic, potential, biconjugate_error: 0.0 }
    }

    pub fn value(&self, x: &[f64], q: &[f64]) -> f64 {
        let k = self.kinetic.value_or_inf(q);
        match &self.potential {
            Some(u) => k - u.value(x),
            None => k,
        }
    }

    /// dH/dq.
    pub fn d_costate(&self, q: &[f64]) -> Option<Vec<f64>> {
        self.kinetic.gradient(q)
    }

    /// dH/dx.
    pub fn d_state(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.potential {
            Some(u) => u.gradient(x).map(|g| g.into_iter().map(|v| -v).collect()),
            None => Some(vec![0.0; x.len()]),
        }
    }

    /// Inverse mass when the flow is free motion with a quadratic kinetic
    /// energy.
    pub fn free_inverse_mass(&self) -> Option<f64> {
        let free = match &self.potential {
            None => true,
            Some(ScalarField::Quadratic { scale }) => *scale == 0.0,
            Some(_) => false,
        };
        match (&self.kinetic, free) {
            (ScalarField::Quadratic { scale }, true) => Some(*scale),
            _ => None,
        }
    }
}

/// Hamiltonian of `l`. Sampled kinetic terms are conjugated onto
/// `dual_axes` (their own axes when None).
pub fn hamiltonian_of(l: &LagrangianSpec, dual_axes: Option<&[Vec<f64>]>) -> Result<HamiltonianSpec> {
    let (kinetic, err) = match l.kinetic() {
        ScalarField::Quadratic { scale } => (ScalarField::Quadratic { scale: 1.0 / scale }, 0.0),
        ScalarField::Grid(g) => {
            let rep = is_convex(&g, 1e-9 * scale_of(&g));
            if !rep.convex {
                return Err(Error::NonConvexInput(format!(
                    "kinetic samples violate convexity by {:e}",
                    rep.worst_violation
                )));
            }
            let axes = dual_axes.map(|a| a.to_vec()).unwrap_or_else(|| g.axes().to_vec());
            let h0 = legendre_conjugate(&g, &axes)?;
            let back = legendre_conjugate(&h0, g.axes())?;
            let err = g
                .values()
                .iter()
                .zip(back.values())
                .filter(|(a, _)| !grid::is_sentinel(**a))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (ScalarField::Grid(h0), err)
        }
    };
    Ok(HamiltonianSpec {
        kinetic,
        potential: l.potential().cloned(),
        biconjugate_error: err,
    })
}

fn scale_of(g: &GridFunction) -> f64 {
    g.values()
        .iter()
        .filter(|v| !grid::is_sentinel(**v))
        .fold(1.0f64, |m, v| m.max(v.abs()))
}

/// L~(v, q) = L*(q, v): the Lagrangian of the dual (covector) problem.
#[derive(Clone, Debug, PartialEq)]
pub enum DualLagrangian {
    /// Finite only for q = 0, where it equals H0(v).
    Constrained { h0: ScalarField },
    /// L~(v, q) = H0(v) + U*(q).
    Separable { h0: ScalarField, potential_conjugate: ScalarField },
}

impl DualLagrangian {
    pub fn value(&self, v: &[f64], q: &[f64]) -> f64 {
        match self {
            DualLagrangian::Constrained { h0 } => {
                if q.iter().all(|c| *c == 0.0) {
                    h0.value_or_inf(v)
                } else {
                    SENTINEL
                }
            }
            DualLagrangian::Separable { h0, potential_conjugate } => {
                grid::add(h0.value_or_inf(v), potential_conjugate.value_or_inf(q))
            }
        }
    }

    /// Applies the construction again, returning a Lagrangian in the
    /// original variables.
    pub fn dual(&self, dual_axes: Option<&[Vec<f64>]>) -> Result<LagrangianSpec> {
        let conj = |f: &ScalarField| -> Result<ScalarField> {
            match f {
                ScalarField::Quadratic { scale } => Ok(ScalarField::Quadratic { scale: 1.0 / scale }),
                ScalarField::Grid(g) => {
                    let axes = dual_axes.map(|a| a.to_vec()).unwrap_or_else(|| g.axes().to_vec());
                    Ok(ScalarField::Grid(legendre_conjugate(g, &axes)?))
                }
            }
        };
        match self {
            DualLagrangian::Constrained { h0 } => LagrangianSpec::state_independent(conj(h0)?),
            DualLagrangian::Separable { h0, potential_conjugate } => {
                LagrangianSpec::separable(conj(h0)?, conj(potential_conjugate)?)
            }
        }
    }
}

/// Dual Lagrangian of `l`; sampled parts are conjugated onto `dual_axes`
/// (their own axes when None).
pub fn dual_lagrangian(l: &LagrangianSpec, dual_axes: Option<&[Vec<f64>]>) -> Result<DualLagrangian> {
    let h0 = hamiltonian_of(l, dual_axes)?.kinetic;
    match l.potential() {
        None => Ok(DualLagrangian::Constrained { h0 }),
        Some(ScalarField::Quadratic { scale }) if *scale == 0.0 => Ok(DualLagrangian::Constrained { h0 }),
        Some(ScalarField::Quadratic { scale }) => Ok(DualLagrangian::Separable {
            h0,
            potential_conjugate: ScalarField::Quadratic { scale: 1.0 / scale },
        }),
        Some(ScalarField::Grid(u)) => {
            if u.values().iter().all(|v| *v == 0.0) {
                return Ok(DualLagrangian::Constrained { h0 });
            }
            let axes = dual_axes.map(|a| a.to_vec()).unwrap_or_else(|| u.axes().to_vec());
            Ok(DualLagrangian::Separable {
                h0,
                potential_conjugate: ScalarField::Grid(legendre_conjugate(u, &axes)?),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub pass: bool,
    /// Largest observed violation (0 when none).
    pub worst: f64,
    /// (x, p) where the worst violation occurred.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

impl AssumptionCheck {
    fn new() -> Self {
        Self { pass: true, worst: 0.0, witness: None }
    }

    fn record(&mut self, violation: f64, x: &[f64], p: &[f64]) {
        if violation > 0.0 {
            self.pass = false;
            if violation > self.worst {
                self.worst = violation;
                self.witness = Some((x.to_vec(), p.to_vec()));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub joint_convexity: AssumptionCheck,
    pub finite_velocity: AssumptionCheck,
    pub coercivity: AssumptionCheck,
    pub theta_superlinear: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.joint_convexity.pass && self.finite_velocity.pass && self.coercivity.pass
    }
}

fn sample_in(rng: &mut ChaCha8Rng, b: &[(f64, f64)]) -> Vec<f64> {
    b.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
}

/// Checks joint convexity by midpoint sampling, the finite-velocity bound
/// by nearest finite velocity, and the coercive lower bound pointwise.
pub fn validate_assumptions(
    l: &LagrangianSpec,
    x_box: &[(f64, f64)],
    p_box: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pr = &l.params;
    let mut convexity = AssumptionCheck::new();
    let mut finite = AssumptionCheck::new();
    let mut growth = AssumptionCheck::new();

    for _ in 0..n_samples {
        let (x1, p1) = (sample_in(&mut rng, x_box), sample_in(&mut rng, p_box));
        let (x2, p2) = (sample_in(&mut rng, x_box), sample_in(&mut rng, p_box));
        let (l1, l2) = (l.value(&x1, &p1), l.value(&x2, &p2));
        if grid::is_sentinel(l1) || grid::is_sentinel(l2) {
            continue;
        }
        let xm: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 0.5 * (a + b)).collect();
        let pm: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| 0.5 * (a + b)).collect();
        let lm = l.value(&xm, &pm);
        let tol = 1e-9 * (1.0 + l1.abs().max(l2.abs()));
        convexity.record(lm - 0.5 * (l1 + l2) - tol, &xm, &pm);
    }

    // Finite velocities: the closed forms are finite everywhere; sampled
    // kinetic terms are finite on their finite nodes.
    let kin = l.kinetic();
    let nearest_finite = |x: &[f64]| -> f64 {
        if let Some(u) = l.potential() {
            if grid::is_sentinel(u.value_or_inf(x)) {
                return f64::INFINITY;
            }
        }
        match &kin {
            ScalarField::Quadratic { .. } => 0.0,
            ScalarField::Grid(g) => (0..g.len())
                .filter(|&i| !grid::is_sentinel(g.values()[i]))
                .map(|i| norm2(&g.point(i)).sqrt())
                .fold(f64::INFINITY, f64::min),
        }
    };
    let half_res = match &kin {
        ScalarField::Grid(g) => 0.5 * g.resolution(),
        _ => 0.0,
    };
    let theta_slack = {
        let th = ScalarField::Grid(pr.theta.clone());
        th.curvature_bound() * pr.theta.resolution().powi(2) / 8.0
    };
    for _ in 0..n_samples {
        let x = sample_in(&mut rng, x_box);
        let xn = norm2(&x).sqrt();
        let d = nearest_finite(&x);
        finite.record(d - pr.rho * (1.0 + xn) - half_res, &x, &[]);

        let p = sample_in(&mut rng, p_box);
        let lv = l.value(&x, &p);
        if grid::is_sentinel(lv) {
            continue;
        }
        let r = (norm2(&p).sqrt() - pr.alpha * xn).max(0.0);
        let bound = pr.theta_at(r) - pr.beta * xn;
        let tol = 1e-9 * (1.0 + lv.abs()) + theta_slack;
        growth.record(bound - lv - tol, &x, &p);
    }

    AssumptionReport {
        joint_convexity: convexity,
        finite_velocity: finite,
        coercivity: growth,
        theta_superlinear: pr.theta_superlinear(),
    }
}

/// <v, x> for covectors and points of equal dimension.
pub fn pairing(v: &[f64], x: &[f64]) -> f64 {
    dot(v, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;

    fn abs_l0() -> ScalarField {
        ScalarField::Grid(GridFunction::from_fn(vec![linspace(-4.0, 4.0, 81)], Convexity::Convex, |p| p[0].abs()).unwrap())
    }

    #[test]
    fn quadratic_hamiltonians() {
        let h1 = hamiltonian_of(&LagrangianSpec::quadratic(1.0).unwrap(), None).unwrap();
        assert_eq!(h1.value(&[3.0], &[2.0]), 2.0);
        let h2 = hamiltonian_of(&LagrangianSpec::quadratic(2.0).unwrap(), None).unwrap();
        assert_eq!(h2.value(&[0.0], &[2.0]), 1.0);
        assert!(LagrangianSpec::quadratic(0.0).is_err());
    }

    #[test]
    fn abs_kinetic_hamiltonian() {
        let l = LagrangianSpec::state_independent(abs_l0()).unwrap();
        let h = hamiltonian_of(&l, Some(&[linspace(-3.0, 3.0, 61)])).unwrap();
        for q in [-3.0, -1.5, -0.5, 0.0, 0.7, 1.0, 2.0] {
            let want = if f64::abs(q) <= 1.0 { 0.0 } else { 4.0 * f64::abs(q) - 4.0 };
            assert!((h.kinetic.value(&[q]) - want).abs() < 1e-9, "q={q}");
            assert!((l.h0(&[q]) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_convex_parts() {
        let bad = GridFunction::from_fn(vec![linspace(-2.0, 2.0, 21)], Convexity::Unknown, |x| -x[0].abs()).unwrap();
        assert!(matches!(
            LagrangianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, ScalarField::Grid(bad.clone())),
            Err(Error::NonConvexInput(_))
        ));
        let flagged_wrong = bad.with_flag(Convexity::Convex);
        let l = LagrangianSpec::state_independent(ScalarField::Grid(flagged_wrong)).unwrap();
        assert!(matches!(hamiltonian_of(&l, None), Err(Error::NonConvexInput(_))));
    }

    #[test]
    fn dual_lagrangian_of_quadratic() {
        let d = dual_lagrangian(&LagrangianSpec::quadratic(1.0).unwrap(), None).unwrap();
        assert_eq!(d.value(&[1.0], &[0.0]), 0.5);
        assert_eq!(d.value(&[1.0], &[0.1]), SENTINEL);
        let zero_u = LagrangianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, ScalarField::zero()).unwrap();
        assert_eq!(dual_lagrangian(&zero_u, None).unwrap(), d);
    }

    #[test]
    fn dual_lagrangian_is_an_involution() {
        let l = LagrangianSpec::separable(ScalarField::Quadratic { scale: 2.0 }, ScalarField::Quadratic { scale: 0.5 }).unwrap();
        let back = dual_lagrangian(&l, None).unwrap().dual(None).unwrap();
        for (x, p) in [(0.3, -1.0), (2.0, 0.5)] {
            assert!((back.value(&[x], &[p]) - l.value(&[x], &[p])).abs() < 1e-12);
        }
        // sampled: L0 = p^2/2 on a grid whose slopes stay inside the dual grid
        let l0 = GridFunction::from_fn(vec![linspace(-2.0, 2.0, 401)], Convexity::Convex, |p| 0.5 * p[0] * p[0]).unwrap();
        let l = LagrangianSpec::state_independent(ScalarField::Grid(l0.clone())).unwrap();
        let d = dual_lagrangian(&l, Some(&[linspace(-2.0, 2.0, 401)])).unwrap();
        let back = d.dual(Some(&[linspace(-2.0, 2.0, 401)])).unwrap();
        for (i, p) in l0.axes()[0].iter().enumerate() {
            assert!((back.kinetic().value(&[*p]) - l0.values()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn assumptions_for_covered_examples() {
        let bx = [(-3.0, 3.0)];
        let q = LagrangianSpec::quadratic(1.0).unwrap();
        let r = validate_assumptions(&q, &bx, &bx, 2000, 1);
        assert!(r.all_pass(), "{r:?}");
        assert!(r.theta_superlinear);

        let sep = LagrangianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, ScalarField::Quadratic { scale: 2.0 }).unwrap();
        assert!(validate_assumptions(&sep, &bx, &bx, 2000, 2).all_pass());

        let theta = GridFunction::from_fn(vec![linspace(0.0, 10.0, 101)], Convexity::Convex, |r| r[0]).unwrap();
        let abs = LagrangianSpec::state_independent(abs_l0())
            .unwrap()
            .with_params(AssumptionParams::new(0.0, 0.0, 0.0, theta).unwrap());
        let r = validate_assumptions(&abs, &bx, &bx, 2000, 3);
        assert!(r.all_pass(), "{r:?}");
        assert!(!r.theta_superlinear);
    }

    #[test]
    fn coercivity_failure_has_witness() {
        let abs = LagrangianSpec::state_independent(abs_l0()).unwrap();
        let r = validate_assumptions(&abs, &[(-1.0, 1.0)], &[(-4.0, 4.0)], 500, 4);
        assert!(!r.coercivity.pass);
        let (_, p) = r.coercivity.witness.unwrap();
        assert!(p[0].abs() > 2.0);
    }

    #[test]
    fn theta_must_be_monotone() {
        let t = GridFunction::from_fn(vec![linspace(0.0, 1.0, 5)], Convexity::Unknown, |r| -r[0]).unwrap();
        assert!(AssumptionParams::new(0.0, 0.0, 0.0, t).is_err());
    }
}
