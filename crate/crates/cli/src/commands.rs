//! One function per subcommand; each turns a config into a report.

use ballistic_core::costs::{ballistic_cost_scan, CostSpec};
use ballistic_core::eulerian::{self, CellGrid, EulerianOptions};
use ballistic_core::grid::{is_convex, Convexity, GridFunction};
use ballistic_core::hamiltonian::{self, flow};
use ballistic_core::interpolation::{self, Certificate, DualityOptions, ReverseOptions};
use ballistic_core::lagrangian::{hamiltonian_of, validate_assumptions, AssumptionCheck, AssumptionParams};
use ballistic_core::ot::{self, CostMatrix, Direction, OtResult};
use ballistic_core::DiscreteMeasure;

use crate::config::Config;
use crate::problem::{self, LAGRANGIAN_KEYS, MEASURE_KEYS};
use crate::report::{num, point, Report, Table};
use crate::{CliError, Command, Overrides};

const COMMANDS: [Command; 8] = [
    Command::Transport,
    Command::Ballistic,
    Command::Interpolate,
    Command::Reverse,
    Command::Duality,
    Command::Flowmap,
    Command::Eulerian,
    Command::Validate,
];

fn section_keys(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Transport => &["cost", "direction", "tolerance"],
        Command::Ballistic => &["tolerance"],
        Command::Interpolate => &["direction", "window", "spacing", "refinements", "tolerance", "value_tolerance"],
        Command::Reverse => &["probes", "seed", "tolerance", "probe_tolerance"],
        Command::Duality => &["spacing", "perturbations", "seed", "tolerance"],
        Command::Flowmap => &["window", "spacing", "tolerance", "steps"],
        Command::Eulerian => &[
            "window",
            "spacing",
            "levels",
            "amplitude",
            "tolerance",
            "terminal_tolerance",
            "intermediate_window",
            "intermediate_spacing",
        ],
        Command::Validate => &["x_box", "p_box", "dim", "samples", "seed", "rho", "alpha", "beta", "theta_scale", "theta_max"],
    }
}

/// Every section a problem file may contain, with its allowed keys.
pub fn schema() -> Vec<(&'static str, &'static [&'static str])> {
    let mut s = vec![("lagrangian", LAGRANGIAN_KEYS), ("measures", MEASURE_KEYS)];
    s.extend(COMMANDS.iter().map(|c| (c.name(), section_keys(*c))));
    s
}

pub fn execute(cmd: Command, c: &Config, o: Overrides) -> Result<Report, CliError> {
    c.check_schema(&schema())?;
    match cmd {
        Command::Transport => transport(c, o),
        Command::Ballistic => ballistic(c, o),
        Command::Interpolate => interpolate(c, o),
        Command::Reverse => reverse(c, o),
        Command::Duality => duality(c, o),
        Command::Flowmap => flowmap(c, o),
        Command::Eulerian => eulerian_cmd(c, o),
        Command::Validate => validate(c, o),
    }
}

fn tolerance(c: &Config, section: &str, o: Overrides, default: f64) -> Result<f64, CliError> {
    match o.tol {
        Some(t) => Ok(t),
        None => c.f64_or(section, "tolerance", default),
    }
}

fn seed(c: &Config, section: &str, o: Overrides) -> Result<u64, CliError> {
    match o.seed {
        Some(s) => Ok(s),
        None => c.u64(section, "seed")?.ok_or_else(|| CliError::input(format!("[{section}] needs a seed (or pass --seed)"))),
    }
}

fn direction(c: &Config, section: &str) -> Result<Direction, CliError> {
    match c.str(section, "direction").unwrap_or("min") {
        "min" => Ok(Direction::Min),
        "max" => Ok(Direction::Max),
        other => Err(CliError::input(format!("direction must be min or max, got `{other}`"))),
    }
}

fn flag(pass: bool, lhs: f64, rhs: f64, tolerance: f64) -> Certificate {
    Certificate { lhs, rhs, difference: (lhs - rhs).abs(), tolerance, pass }
}

fn plan_table(name: &str, r: &OtResult, cost: &CostMatrix, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Table {
    let mut t = Table::new(name, &["source", "target", "source_point", "target_point", "mass", "cost"]);
    for (i, j, m) in r.plan.support() {
        t.push(vec![i.to_string(), j.to_string(), point(&mu.points()[i]), point(&nu.points()[j]), num(m), num(cost.get(i, j))]);
    }
    t
}

fn potential_table(name: &str, r: &OtResult) -> Table {
    let mut t = Table::new(name, &["side", "index", "value"]);
    for (k, g) in r.source_potential.iter().enumerate() {
        t.push(vec!["source".into(), k.to_string(), num(*g)]);
    }
    for (k, h) in r.target_potential.iter().enumerate() {
        t.push(vec!["target".into(), k.to_string(), num(*h)]);
    }
    t
}

fn solve_block(rep: &mut Report, label: &str, r: &OtResult, cost: &CostMatrix, dir: Direction, tol: f64) {
    rep.value(&format!("{label}value"), r.value);
    rep.value(&format!("{label}dual value"), r.dual_value);
    rep.value(&format!("{label}gap"), r.gap);
    rep.line(&format!("{label}pivots"), r.pivots);
    rep.line(&format!("{label}plan nonzeros"), r.plan.support().len());
    rep.line(&format!("{label}source potential"), point(&r.source_potential));
    rep.line(&format!("{label}target potential"), point(&r.target_potential));
    let scale = tol * (1.0 + r.value.abs());
    rep.certificate(&format!("{label}strong duality"), &Certificate::new(r.value, r.dual_value, scale));
    let p = ot::check_potentials(r, cost, dir, scale);
    let worst = p.worst_admissibility.max(p.worst_slackness).max(0.0);
    rep.certificate(&format!("{label}potential admissibility and slackness"), &Certificate::at_most(worst, 0.0, scale));
}

fn transport(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let (mu, nu) = problem::measures(c)?;
    let s = "transport";
    let tol = tolerance(c, s, o, 1e-9)?;
    let dir = direction(c, s)?;
    let kind = c.str(s, "cost").unwrap_or("bilinear");
    let cost = match kind {
        "bilinear" => ot::bilinear_cost(&mu, &nu)?,
        "ballistic" => ot::ballistic_cost_matrix(&problem::cost_spec(c)?, &mu, &nu)?,
        "fixed-end" => ot::fixed_end_cost_matrix(&problem::cost_spec(c)?, &mu, &nu)?,
        other => return Err(CliError::input(format!("unknown cost `{other}` (bilinear, ballistic, fixed-end)"))),
    };
    let r = ot::solve(&cost, &mu, &nu, dir)?;
    let mut rep = Report::new("transport");
    rep.line("cost", kind);
    rep.line("direction", if dir == Direction::Min { "min" } else { "max" });
    solve_block(&mut rep, "", &r, &cost, dir, tol);
    rep.table(plan_table("plan", &r, &cost, &mu, &nu));
    rep.table(potential_table("potentials", &r));
    Ok(rep)
}

fn ballistic(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let (mu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    let tol = tolerance(c, "ballistic", o, 1e-9)?;
    let cost = ot::ballistic_cost_matrix(&spec, &mu0, &nu_t)?;
    let lo = ot::solve(&cost, &mu0, &nu_t, Direction::Min)?;
    let hi = ot::solve(&cost, &mu0, &nu_t, Direction::Max)?;
    let mut rep = Report::new("ballistic");
    rep.value("horizon", spec.horizon);
    solve_block(&mut rep, "least ", &lo, &cost, Direction::Min, tol);
    solve_block(&mut rep, "greatest ", &hi, &cost, Direction::Max, tol);
    rep.table(plan_table("plan_least", &lo, &cost, &mu0, &nu_t));
    rep.table(plan_table("plan_greatest", &hi, &cost, &mu0, &nu_t));
    Ok(rep)
}

fn interpolate(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "interpolate";
    let (mu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    let dir = direction(c, s)?;
    let window = c.range(s, "window")?.ok_or_else(|| CliError::input("[interpolate] needs `window = lo, hi`"))?;
    let h = c.f64_or(s, "spacing", 0.05)?;
    let axes = problem::window_axes(window, h, mu0.dim())?;
    let r = match dir {
        Direction::Min => interpolation::interpolate_min(&spec, &mu0, &nu_t, &axes)?,
        Direction::Max => interpolation::interpolate_max(&spec, &mu0, &nu_t, &axes)?,
    };
    let mut rep = Report::new("interpolate");
    rep.line("direction", if dir == Direction::Min { "min" } else { "max" });
    rep.value("value", r.value);
    rep.value("exact ballistic value", r.ballistic_value);
    rep.value("potential duality gap", r.potential_gap);
    rep.line("potential shape", if r.potential_shape.convex { "as expected" } else { "violated" });
    rep.value("potential shape violation", r.potential_shape.worst_violation);
    let cert = match o.tol.or(c.f64(s, "tolerance")?) {
        Some(t) => Certificate::new(r.certificate.lhs, r.certificate.rhs, t),
        None => r.certificate.clone(),
    };
    rep.certificate("composed value against the two transport values", &cert);
    let vt = c.f64_or(s, "value_tolerance", 1e-3)?;
    rep.certificate("grid value against the exact ballistic value", &Certificate::new(r.value, r.ballistic_value, vt));

    let mut inter = Table::new("intermediate", &["point", "mass"]);
    for (p, w) in r.intermediate.points().iter().zip(r.intermediate.weights()) {
        inter.push(vec![point(p), num(*w)]);
    }
    rep.table(inter);
    let mut pairs = Table::new("pairs", &["source", "target", "point", "mass"]);
    for p in &r.pairs {
        pairs.push(vec![p.source.to_string(), p.target.to_string(), point(&p.point), num(p.mass)]);
    }
    rep.table(pairs);

    if dir == Direction::Min {
        let spacings = match c.list(s, "refinements")? {
            Some(v) => v,
            None => vec![4.0 * h, 2.0 * h, h],
        };
        let win: Vec<(f64, f64)> = vec![window; mu0.dim()];
        let rows = interpolation::refinement_table(&spec, &mu0, &nu_t, &win, &spacings)?;
        let mut t = Table::new("refinement", &["spacing", "value"]);
        let mut rise = 0.0f64;
        for (k, (hk, v)) in rows.iter().enumerate() {
            t.push(vec![num(*hk), num(*v)]);
            if k > 0 {
                rise = rise.max(v - rows[k - 1].1);
            }
        }
        rep.table(t);
        rep.certificate("refined values do not increase", &Certificate::at_most(rise.max(0.0), 0.0, 1e-12));
    }
    Ok(rep)
}

fn reverse(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "reverse";
    let (nu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    let opts = ReverseOptions {
        probes: c.usize_or(s, "probes", 100)?,
        seed: seed(c, s, o)?,
        tolerance: tolerance(c, s, o, 1e-6)?,
        probe_tolerance: c.f64_or(s, "probe_tolerance", 1e-9)?,
    };
    let r = interpolation::reverse_interpolate(&spec, &nu0, &nu_t, &opts)?;
    let mut rep = Report::new("reverse");
    rep.value("fixed-end value", r.transport_value);
    if let Some(conc) = &r.concavity {
        rep.certificate("initial potential is concave", &flag(conc.convex, conc.worst_violation, 0.0, 0.0));
    }
    match (&r.equality, &r.initial_covectors) {
        (Some(eq), Some(mu0)) => {
            rep.certificate("fixed-end value against ballistic minus bilinear value", eq);
            let mut t = Table::new("covectors", &["point", "mass"]);
            for (p, w) in mu0.points().iter().zip(mu0.weights()) {
                t.push(vec![point(p), num(*w)]);
            }
            rep.table(t);
        }
        _ => rep.line("initial covectors", "unavailable"),
    }
    if let Some(g) = &r.potential {
        let mut t = Table::new("potential", &["point", "value"]);
        for (k, v) in g.values().iter().enumerate() {
            t.push(vec![point(&g.point(k)), num(*v)]);
        }
        rep.table(t);
    }
    rep.line("probes", r.probes);
    rep.certificate(
        "probe values stay below the fixed-end value",
        &Certificate::at_most(r.transport_value + r.worst_probe, r.transport_value, r.probe_tolerance),
    );
    Ok(rep)
}

fn duality(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "duality";
    let (mu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    let opts = DualityOptions {
        spacing: c.f64_or(s, "spacing", 0.01)?,
        perturbations: c.usize_or(s, "perturbations", 20)?,
        seed: seed(c, s, o)?,
        tolerance: tolerance(c, s, o, 1e-4)?,
    };
    let r = interpolation::duality_check(&spec, &mu0, &nu_t, &opts)?;
    let mut rep = Report::new("duality");
    rep.certificate("least value against value-function objective", &r.min_certificate);
    rep.certificate("greatest value against mirrored objective", &r.max_certificate);
    rep.certificate(
        "initial value function is concave",
        &flag(r.initial_shape.convex, r.initial_shape.worst_violation, 0.0, 0.0),
    );
    let best = r.perturbed.iter().map(|p| p.objective).fold(f64::NEG_INFINITY, f64::max);
    let b = r.min_certificate.lhs;
    if !r.perturbed.is_empty() {
        rep.certificate("perturbed objectives stay strictly below", &flag(r.perturbed_below, best, b, 0.0));
    }
    let mut t = Table::new("perturbed", &["epsilon", "center", "objective"]);
    for p in &r.perturbed {
        t.push(vec![num(p.epsilon), point(&p.center), num(p.objective)]);
    }
    rep.table(t);
    Ok(rep)
}

fn flowmap(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "flowmap";
    let (mu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    let window = c.range(s, "window")?.unwrap_or((-3.0, 3.0));
    let axes = problem::window_axes(window, c.f64_or(s, "spacing", 1e-3)?, mu0.dim())?;
    let tol = tolerance(c, s, o, 1e-8)?;
    let r = ot::ballistic_under(&spec, &mu0, &nu_t)?;
    let kt = hamiltonian::ballistic_covector_potential(&spec, &mu0, &nu_t, &r.plan, &axes)?;
    let map = hamiltonian::map_from_covector_potential(&spec, &kt, mu0.points())?;
    let radius = kt.resolution();
    let off = hamiltonian::verify_support(&r.plan, nu_t.points(), &map, radius);
    let mut rep = Report::new("flowmap");
    rep.value("least ballistic value", r.value);
    rep.value("support radius", radius);
    rep.certificate("plan mass off the flow map graph", &Certificate::at_most(off, 0.0, tol));

    let mut t = Table::new("map", &["source", "covector", "image"]);
    for (k, (v, x)) in map.inputs.iter().zip(&map.outputs).enumerate() {
        t.push(vec![k.to_string(), point(v), point(x)]);
    }
    rep.table(t);

    // Trajectories of the state/covector flow from each source atom.
    let steps = c.usize_or(s, "steps", 100)?.max(1);
    let ham = hamiltonian_of(&spec.lagrangian, Some(&axes))?;
    let mut traj = Table::new("trajectories", &["source", "time", "state", "covector"]);
    for (k, (v, x)) in map.inputs.iter().zip(&map.outputs).enumerate() {
        match start_point(&spec, v, x, &axes).and_then(|y| Ok(flow(&ham, &y, v, spec.horizon, steps)?)) {
            Ok(tr) => {
                for ((t, st), co) in tr.times.iter().zip(&tr.states).zip(&tr.costates) {
                    traj.push(vec![k.to_string(), num(*t), point(st), point(co)]);
                }
            }
            Err(e) => rep.line(&format!("trajectory {k}"), format!("unavailable ({e})")),
        }
    }
    rep.table(traj);
    Ok(rep)
}

/// Initial state of the flow that ends at `x`: closed form under free
/// motion, otherwise the minimizing start of the ballistic cost.
fn start_point(spec: &CostSpec, v: &[f64], x: &[f64], axes: &[Vec<f64>]) -> Result<Vec<f64>, CliError> {
    match spec.lagrangian.mass() {
        Some(m) => Ok(x.iter().zip(v).map(|(xi, vi)| xi - spec.horizon * vi / m).collect()),
        None => Ok(ballistic_cost_scan(spec, v, x, axes)?.1),
    }
}

fn eulerian_cmd(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "eulerian";
    let (mu0, nu_t) = problem::measures(c)?;
    let spec = problem::cost_spec(c)?;
    if mu0.dim() != 1 {
        return Err(CliError::input("the dynamic formulation is available in one dimension"));
    }
    let window = c.range(s, "window")?.ok_or_else(|| CliError::input("[eulerian] needs `window = lo, hi`"))?;
    let h = c.f64_or(s, "spacing", 0.02)?;
    let levels = c.usize_or(s, "levels", 3)?;
    let amplitude = c.f64_or(s, "amplitude", 0.5)?;
    let iw = c.range(s, "intermediate_window")?.unwrap_or(window);
    let ih = c.f64_or(s, "intermediate_spacing", 0.05)?;

    let inter = interpolation::interpolate_min(&spec, &mu0, &nu_t, &problem::window_axes(iw, ih, 1)?)?;
    let nu0 = inter.intermediate;
    let mut rep = Report::new("eulerian");
    rep.value("least ballistic value", inter.value);
    rep.line("initial density atoms", nu0.len());

    // Finest level of the refinement study carries the bound checks.
    let finest = h / (1u64 << levels.saturating_sub(1)) as f64;
    let grid = CellGrid::with_spacing(window.0, window.1, finest)?;
    let speed = eulerian::displacement_speed(&nu0, &nu_t, spec.horizon, &grid, 64)?;
    let steps = 2 * eulerian::min_steps(1.05 * speed, spec.horizon, grid.dx());
    let allowance = grid.dx() + spec.horizon / steps as f64;
    let tol = tolerance(c, s, o, allowance)?;
    let opts = EulerianOptions { feasibility_tol: None, nu_t_tol: c.f64_or(s, "terminal_tolerance", 0.1)?, tolerance: tol };

    if levels >= 1 {
        let conv = eulerian::displacement_convergence(&spec, &nu0, &nu_t, window, h, levels)?;
        rep.value("fixed-end value", conv.reference);
        let mut t = Table::new("refinement", &["dx", "dt", "action", "error"]);
        for r in &conv.rows {
            t.push(vec![num(r.dx), num(r.dt), num(r.action), num(r.error)]);
        }
        rep.table(t);
        let last = conv.rows.last().expect("at least one level");
        rep.certificate("finest action against the fixed-end value", &Certificate::new(last.action, conv.reference, last.dx + last.dt));
        if conv.rows.len() >= 2 {
            if conv.rows[0].error <= 1e-12 {
                rep.line("observed rate", "exact at every level");
            } else {
                let rate = conv.min_rate();
                rep.certificate("observed convergence rate at least 0.9", &flag(rate >= 0.9, 0.9, rate, 0.0));
            }
        }
    }

    let (rho, w) = eulerian::displacement_path(&nu0, &nu_t, spec.horizon, steps, &grid)?;
    let geo = eulerian::eulerian_upper_bound_check(&spec, &mu0, &nu_t, &rho, &w, &opts)?;
    rep.value("continuity residual", geo.residual);
    rep.value("terminal distance", geo.terminal_distance);
    rep.value("path action", geo.action);
    rep.certificate("path value bounds the ballistic value", &geo.certificate);
    rep.certificate("path value matches the ballistic value", &Certificate::new(geo.certificate.lhs, geo.certificate.rhs, tol));

    if amplitude != 0.0 {
        let (prho, pw) = eulerian::perturbed_path(&rho, &w, amplitude)?;
        let target = prho.atomized(prho.steps())?;
        let p = eulerian::eulerian_upper_bound_check(&spec, &mu0, &target, &prho, &pw, &opts)?;
        rep.certificate("perturbed path bounds its ballistic value", &p.certificate);
        rep.certificate("perturbed path margin is positive", &flag(p.margin > 0.0, p.certificate.lhs, p.certificate.rhs, 0.0));
    }

    let mut snap = Table::new("density", &["time", "x", "mass"]);
    let every = (rho.steps() / 10).max(1);
    for k in (0..=rho.steps()).step_by(every) {
        for (i, m) in rho.mass(k).iter().enumerate() {
            if *m > 1e-12 {
                snap.push(vec![num(rho.times()[k]), num(rho.grid().center(i)), num(*m)]);
            }
        }
    }
    rep.table(snap);
    Ok(rep)
}

fn validate(c: &Config, o: Overrides) -> Result<Report, CliError> {
    let s = "validate";
    let mut l = problem::lagrangian(c)?;
    let dim = match l.dim() {
        Some(d) => d,
        None => c.usize_or(s, "dim", 1)?,
    };
    let xb = c.range(s, "x_box")?.unwrap_or((-2.0, 2.0));
    let pb = c.range(s, "p_box")?.unwrap_or((-2.0, 2.0));
    let samples = c.usize_or(s, "samples", 1000)?;
    let seed = seed(c, s, o)?;
    if ["rho", "alpha", "beta", "theta_scale", "theta_max"].iter().any(|k| c.str(s, k).is_some()) {
        let scale = c.f64_or(s, "theta_scale", 1.0)?;
        let r_max = c.f64_or(s, "theta_max", 20.0)?;
        if !(scale >= 0.0 && r_max > 0.0) {
            return Err(CliError::input("theta_scale must be non-negative and theta_max positive"));
        }
        let theta = GridFunction::from_fn(vec![ballistic_core::grid::linspace(0.0, r_max, 401)], Convexity::Convex, |r| {
            0.5 * scale * r[0] * r[0]
        })?;
        let params = AssumptionParams::new(c.f64_or(s, "rho", 0.0)?, c.f64_or(s, "alpha", 0.0)?, c.f64_or(s, "beta", 0.0)?, theta)?;
        l = l.with_params(params);
    }
    let r = validate_assumptions(&l, &vec![xb; dim], &vec![pb; dim], samples, seed);
    let mut rep = Report::new("validate");
    rep.line("samples", samples);
    rep.line("growth minorant superlinear", r.theta_superlinear);
    let block = |rep: &mut Report, name: &str, a: &AssumptionCheck| {
        rep.certificate(name, &flag(a.pass, a.worst, 0.0, 0.0));
        if let Some((x, p)) = &a.witness {
            rep.line(&format!("{name} witness"), format!("x = [{}], p = [{}]", point(x), point(p)));
        }
    };
    block(&mut rep, "joint convexity", &r.joint_convexity);
    block(&mut rep, "finite velocity bound", &r.finite_velocity);
    block(&mut rep, "coercive growth", &r.coercivity);
    if let ballistic_core::field::ScalarField::Grid(g) = l.kinetic() {
        let shape = is_convex(&g, 1e-9);
        rep.certificate("sampled kinetic term is convex", &flag(shape.convex, shape.worst_violation, 0.0, 0.0));
    }
    Ok(rep)
}
