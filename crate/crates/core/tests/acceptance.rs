//! End-to-end acceptance criteria. Runs without the test harness so every
//! criterion prints one line; exits non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ballistic_core::costs::{self, CostSpec, DualitySample};
use ballistic_core::eulerian::{self, CellGrid, EulerianOptions};
use ballistic_core::field::ScalarField;
use ballistic_core::grid::{axis_with_spacing, concave_conjugate, is_convex, legendre_conjugate, linspace, Convexity, GridFunction};
use ballistic_core::hamiltonian::{self, flow};
use ballistic_core::interpolation::{self, DualityOptions, ReverseOptions};
use ballistic_core::lagrangian::{hamiltonian_of, HamiltonianSpec, LagrangianSpec};
use ballistic_core::ot::{self, CostKind, CostMatrix, Direction};
use ballistic_core::DiscreteMeasure;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn random_line(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, uniform: bool) -> DiscreteMeasure {
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let w = if uniform { vec![1.0 / n as f64; n] } else { random_weights(rng, n) };
    DiscreteMeasure::on_line(&xs, &w).unwrap()
}

/// Uniform atoms at least `gap` apart.
fn separated_line(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, gap: f64) -> DiscreteMeasure {
    loop {
        let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).all(|w| w[1] - w[0] >= gap) {
            return DiscreteMeasure::on_line(&xs, &vec![1.0 / n as f64; n]).unwrap();
        }
    }
}

fn canonical() -> (CostSpec, DiscreteMeasure, DiscreteMeasure) {
    (
        CostSpec::quadratic(1.0, 1.0).unwrap(),
        DiscreteMeasure::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap(),
        DiscreteMeasure::on_line(&[0.0, 2.0], &[0.5, 0.5]).unwrap(),
    )
}

/// Minimum over all vertices of the transportation polytope, enumerated as
/// spanning trees of the complete bipartite graph.
fn brute_force_min(cost: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let need = m + n - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(need);
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    fn rec(
        start: usize,
        m: usize,
        n: usize,
        need: usize,
        parent: &mut Vec<usize>,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == need {
            visit(chosen);
            return;
        }
        for cell in start..m * n {
            if m * n - cell < need - chosen.len() {
                return;
            }
            let (ri, cj) = (find(parent, cell / n), find(parent, m + cell % n));
            if ri == cj {
                continue;
            }
            parent[ri] = cj;
            chosen.push(cell);
            rec(cell + 1, m, n, need, parent, chosen, visit);
            chosen.pop();
            parent[ri] = ri;
        }
    }
    let mut visit = |tree: &[usize]| {
        let mut rem: Vec<f64> = a.iter().chain(b).copied().collect();
        let mut alive = vec![true; tree.len()];
        let mut total = 0.0;
        for _ in 0..tree.len() {
            let mut degree = vec![0usize; m + n];
            for (k, &c) in tree.iter().enumerate() {
                if alive[k] {
                    degree[c / n] += 1;
                    degree[m + c % n] += 1;
                }
            }
            let (k, leaf) = tree
                .iter()
                .enumerate()
                .filter(|(k, _)| alive[*k])
                .find_map(|(k, &c)| {
                    if degree[c / n] == 1 {
                        Some((k, c / n))
                    } else if degree[m + c % n] == 1 {
                        Some((k, m + c % n))
                    } else {
                        None
                    }
                })
                .unwrap();
            let c = tree[k];
            let other = if leaf < m { m + c % n } else { c / n };
            let f = rem[leaf];
            if f < -1e-12 {
                return;
            }
            rem[other] -= f;
            rem[leaf] = 0.0;
            alive[k] = false;
            total += f * cost[c];
        }
        best = best.min(total);
    };
    rec(0, m, n, need, &mut parent, &mut chosen, &mut visit);
    best
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_gap, mut worst_brute, mut brute_count) = (0.0f64, 0.0f64, 0);
    for inst in 0..200 {
        let small = inst < 60;
        let (m, n) = if small { (rng.gen_range(1..=5), rng.gen_range(1..=5)) } else { (rng.gen_range(1..=64), rng.gen_range(1..=64)) };
        let bilinear = inst % 2 == 1;
        let (mu, nu, cost) = if bilinear {
            let pts = |rng: &mut ChaCha8Rng, k| (0..k).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect::<Vec<_>>();
            let (pm, pn) = (pts(&mut rng, m), pts(&mut rng, n));
            let mu = DiscreteMeasure::new(pm, random_weights(&mut rng, m)).map_err(err)?;
            let nu = DiscreteMeasure::new(pn, random_weights(&mut rng, n)).map_err(err)?;
            let c = ot::bilinear_cost(&mu, &nu).map_err(err)?;
            (mu, nu, c)
        } else {
            let mu = DiscreteMeasure::new((0..m).map(|i| vec![i as f64]).collect(), random_weights(&mut rng, m)).map_err(err)?;
            let nu = DiscreteMeasure::new((0..n).map(|j| vec![j as f64]).collect(), random_weights(&mut rng, n)).map_err(err)?;
            let c = CostMatrix::from_fn(m, n, CostKind::Custom, |_, _| Ok(rng.gen_range(-1.0..1.0))).map_err(err)?;
            (mu, nu, c)
        };
        let dir = if inst % 4 == 3 { Direction::Max } else { Direction::Min };
        let r = ot::solve(&cost, &mu, &nu, dir).map_err(err)?;
        let rel = r.gap / (1.0 + r.value.abs());
        worst_gap = worst_gap.max(rel);
        ensure(rel <= 1e-9, || format!("instance {inst}: gap {:.3e}", r.gap))?;
        if small {
            let sign = if dir == Direction::Max { -1.0 } else { 1.0 };
            let c: Vec<f64> = cost.entries().iter().map(|v| sign * v).collect();
            let brute = sign * brute_force_min(&c, mu.weights(), nu.weights());
            let d = (brute - r.value).abs();
            worst_brute = worst_brute.max(d);
            brute_count += 1;
            ensure(d <= 1e-12, || format!("instance {inst}: simplex {} vs enumeration {brute}", r.value))?;
        }
    }
    Ok(format!("200 instances, worst relative gap {worst_gap:.1e}; {brute_count} enumerated, worst difference {worst_brute:.1e}"))
}

fn random_convex(rng: &mut ChaCha8Rng, axes: Vec<Vec<f64>>) -> GridFunction {
    let d = axes.len();
    let a: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..2.0)).collect();
    let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = rng.gen_range(0.0..1.0);
    let pieces: Vec<(Vec<f64>, f64)> =
        (0..3).map(|_| ((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(-1.0..1.0))).collect();
    GridFunction::from_fn(axes, Convexity::Convex, move |x| {
        let q: f64 = (0..d).map(|i| 0.5 * a[i] * (x[i] - c[i]).powi(2)).sum();
        let hinge = pieces.iter().map(|(s, b)| s.iter().zip(x).map(|(s, x)| s * x).sum::<f64>() + b).fold(f64::MIN, f64::max);
        q + k * hinge.max(0.0)
    })
    .unwrap()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_ratio, mut worst_order) = (0.0f64, 0.0f64);
    for inst in 0..50 {
        let (primal, dual) = if inst % 5 == 4 {
            (vec![linspace(-2.0, 2.0, 41), linspace(-2.0, 2.0, 41)], vec![linspace(-10.0, 10.0, 81), linspace(-10.0, 10.0, 81)])
        } else {
            (vec![axis_with_spacing(-2.0, 2.0, 0.01)], vec![axis_with_spacing(-10.0, 10.0, 0.01)])
        };
        let f = random_convex(&mut rng, primal.clone());
        let fs = legendre_conjugate(&f, &dual).map_err(err)?;
        let fss = legendre_conjugate(&fs, &primal).map_err(err)?;
        let bound = 2.0 * f.resolution().max(fs.resolution()) * f.lipschitz_bound();
        let e = f.values().iter().zip(fss.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(e / bound);
        ensure(e <= bound, || format!("function {inst}: |f** - f| = {e:.3e} above {bound:.3e}"))?;

        // f <= g implies g* <= f*, and likewise for the concave transform.
        let bump = rng.gen_range(0.0..0.5);
        let g = f.map(|x, v| v + bump * (1.0 + x.iter().map(|t| t.abs()).sum::<f64>())).map_err(err)?;
        let gs = legendre_conjugate(&g, &dual).map_err(err)?;
        let over = gs.values().iter().zip(fs.values()).map(|(g, f)| g - f).fold(f64::MIN, f64::max);
        let ft = concave_conjugate(&f.neg(), &dual).map_err(err)?;
        let gt = concave_conjugate(&g.neg(), &dual).map_err(err)?;
        let over_c = ft.values().iter().zip(gt.values()).map(|(f, g)| f - g).fold(f64::MIN, f64::max);
        worst_order = worst_order.max(over).max(over_c);
        ensure(over <= 1e-12 && over_c <= 1e-12, || format!("function {inst}: order reversal broken by {over:.3e}/{over_c:.3e}"))?;
        ensure(is_convex(&fs, 1e-9).convex, || format!("function {inst}: conjugate not convex"))?;
    }
    Ok(format!("50 functions, worst error/bound {worst_ratio:.3}, worst order violation {worst_order:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let window = vec![axis_with_spacing(-8.0, 8.0, 0.01)];
    let (mut worst_c, mut worst_b) = (0.0f64, 0.0f64);
    let mut k = 0;
    while k < 100 {
        let t: f64 = rng.gen_range(0.1..4.0);
        let m: f64 = rng.gen_range(0.5..2.0);
        let y = rng.gen_range(-3.0..3.0);
        let x: f64 = rng.gen_range(-3.0..3.0);
        let v = rng.gen_range(-2.0..2.0);
        // the optimal intermediate point must be interior to the window
        if (x - t * v / m).abs() > 7.5 {
            continue;
        }
        k += 1;
        let spec = CostSpec::quadratic(m, t).map_err(err)?;
        let c = costs::fixed_end_cost(&spec, &[y], &[x]).map_err(err)?;
        let cv = costs::fixed_end_cost_variational(&spec, &[y], &[x]).map_err(err)?;
        let b = costs::ballistic_cost(&spec, &[v], &[x]).map_err(err)?;
        let (bs, _) = costs::ballistic_cost_scan(&spec, &[v], &[x], &window).map_err(err)?;
        worst_c = worst_c.max((c - cv).abs());
        worst_b = worst_b.max((b - bs).abs());
    }
    ensure(worst_c <= 1e-6 && worst_b <= 1e-6, || format!("fixed-end {worst_c:.3e}, ballistic {worst_b:.3e}"))?;
    Ok(format!("100 samples, fixed-end {worst_c:.1e}, ballistic {worst_b:.1e}"))
}

fn criterion_4() -> Outcome {
    let (spec, mu0, nu_t) = canonical();
    let axes = vec![axis_with_spacing(-4.0, 4.0, 0.05)];
    let r = interpolation::interpolate_min(&spec, &mu0, &nu_t, &axes).map_err(err)?;
    ensure((r.value + 1.5).abs() <= 1e-3, || format!("value {}", r.value))?;
    ensure(r.certificate.difference <= 1e-9, || format!("certificate {:?}", r.certificate))?;
    let table = interpolation::refinement_table(&spec, &mu0, &nu_t, &[(-4.0, 4.0)], &[0.4, 0.2, 0.1]).map_err(err)?;
    ensure(table.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12), || format!("refinement {table:?}"))?;
    let vals: Vec<String> = table.iter().map(|(h, v)| format!("{h}:{v:.6}")).collect();
    Ok(format!("value {:.6}, sides differ by {:.1e}, refinement [{}]", r.value, r.certificate.difference, vals.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (spec, mu0, nu_t) = canonical();
    let mut cases = vec![(mu0, nu_t)];
    for _ in 0..10 {
        cases.push((random_line(&mut rng, 8, -1.5, 1.5, false), random_line(&mut rng, 8, -1.5, 1.5, false)));
    }
    let mut worst = 0.0f64;
    let mut max_side = 0;
    for (k, (mu0, nu_t)) in cases.iter().enumerate() {
        let opts = DualityOptions { seed: k as u64, ..Default::default() };
        let r = interpolation::duality_check(&spec, mu0, nu_t, &opts).map_err(err)?;
        worst = worst.max(r.min_certificate.difference);
        ensure(r.min_certificate.pass, || format!("instance {k}: {:?}", r.min_certificate))?;
        ensure(r.perturbed_below, || format!("instance {k}: a perturbed candidate reached the ballistic value"))?;
        if r.max_certificate.pass {
            max_side += 1;
        }
    }
    Ok(format!("11 instances, worst |lhs-rhs| {worst:.1e}, perturbed candidates below; sup mirror passes on {max_side}/11"))
}

fn criterion_6() -> Outcome {
    let ys = linspace(0.0, 1.0, 5);
    let mut worst_eq = 0.0f64;
    let mut worst_probe = f64::MIN;
    for (i, &a) in [0.5, 1.0, 2.0].iter().enumerate() {
        for (j, &t) in [0.5, 1.0, 2.0].iter().enumerate() {
            let spec = CostSpec::quadratic(1.0, t).map_err(err)?;
            let nu0 = DiscreteMeasure::uniform(ys.iter().map(|y| vec![*y]).collect()).map_err(err)?;
            let nu_t = DiscreteMeasure::uniform(ys.iter().map(|y| vec![y + a]).collect()).map_err(err)?;
            let opts = ReverseOptions { seed: (3 * i + j) as u64, ..Default::default() };
            let r = interpolation::reverse_interpolate(&spec, &nu0, &nu_t, &opts).map_err(err)?;
            let closed = a * a / (2.0 * t);
            ensure((r.transport_value - closed).abs() <= 1e-6, || format!("a={a} T={t}: value {} vs {closed}", r.transport_value))?;
            ensure(r.concavity.as_ref().is_some_and(|c| c.convex), || format!("a={a} T={t}: potential not concave"))?;
            let eq = r.equality.as_ref().ok_or_else(|| format!("a={a} T={t}: no equality certificate"))?;
            ensure(eq.difference <= 1e-6, || format!("a={a} T={t}: {eq:?}"))?;
            ensure(r.probes == 100 && r.probes_pass(), || format!("a={a} T={t}: probe excess {:.3e}", r.worst_probe))?;
            worst_eq = worst_eq.max(eq.difference);
            worst_probe = worst_probe.max(r.worst_probe);
        }
    }
    Ok(format!("9 instances, worst equality {worst_eq:.1e}, worst probe excess {worst_probe:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (spec, mu0, nu_t) = canonical();
    let mut cases = vec![(mu0, nu_t)];
    for _ in 0..10 {
        // separated atoms keep every atom inside a differentiability cell
        // of the potential at grid resolution
        cases.push((separated_line(&mut rng, 6, -1.5, 1.5, 0.2), separated_line(&mut rng, 6, -1.5, 1.5, 0.2)));
    }
    let axes = vec![axis_with_spacing(-3.0, 3.0, 1e-3)];
    let mut worst = 0.0f64;
    for (k, (mu0, nu_t)) in cases.iter().enumerate() {
        let r = ot::ballistic_under(&spec, mu0, nu_t).map_err(err)?;
        let kt = hamiltonian::ballistic_covector_potential(&spec, mu0, nu_t, &r.plan, &axes).map_err(err)?;
        let map = hamiltonian::map_from_covector_potential(&spec, &kt, mu0.points()).map_err(err)?;
        let off = hamiltonian::verify_support(&r.plan, nu_t.points(), &map, kt.resolution());
        worst = worst.max(off);
        ensure(off <= 1e-8, || format!("instance {k}: mass off graph {off:.3e}"))?;
    }
    Ok(format!("11 instances, worst mass off graph {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let harmonic = HamiltonianSpec::separable(ScalarField::Quadratic { scale: 1.0 }, Some(ScalarField::Quadratic { scale: -1.0 }));
    let drift = |n| flow(&harmonic, &[1.0], &[0.0], FRAC_PI_2, n).map(|t| t.energy_drift()).map_err(err);
    let (a, b, c) = (drift(50)?, drift(100)?, drift(200)?);
    let (r1, r2) = (a / b, b / c);
    ensure(r1 >= 3.5 && r2 >= 3.5, || format!("drift ratios {r1:.3} {r2:.3}"))?;
    let free = hamiltonian_of(&LagrangianSpec::quadratic(2.0).map_err(err)?, None).map_err(err)?;
    let t = flow(&free, &[1.0], &[3.0], 2.0, 7).map_err(err)?;
    ensure(t.final_state() == [4.0] && t.final_costate() == [3.0], || format!("free flow {:?}", t.final_state()))?;
    Ok(format!("drift ratios {r1:.3}, {r2:.3}; free flow exact"))
}

fn criterion_9() -> Outcome {
    let (spec, mu0, nu_t) = canonical();
    // optimal intermediate of the canonical instance
    let nu0 = DiscreteMeasure::on_line(&[-1.0, 3.0], &[0.5, 0.5]).map_err(err)?;
    let conv = eulerian::displacement_convergence(&spec, &nu0, &nu_t, (-3.0, 5.0), 0.02, 3).map_err(err)?;
    let rate = conv.min_rate();
    ensure(rate >= 0.9, || format!("rates {:?}", conv.rates))?;

    let grid = CellGrid::with_spacing(-3.0, 5.0, 0.01).map_err(err)?;
    let speed = eulerian::displacement_speed(&nu0, &nu_t, spec.horizon, &grid, 64).map_err(err)?;
    let steps = 2 * eulerian::min_steps(1.05 * speed, spec.horizon, grid.dx());
    let (rho, w) = eulerian::displacement_path(&nu0, &nu_t, spec.horizon, steps, &grid).map_err(err)?;
    // discretization allowance: cell width plus time step
    let tol = grid.dx() + spec.horizon / steps as f64;
    let opts = EulerianOptions { tolerance: tol, ..Default::default() };
    let geo = eulerian::eulerian_upper_bound_check(&spec, &mu0, &nu_t, &rho, &w, &opts).map_err(err)?;
    ensure(geo.certificate.pass, || format!("geodesic {:?}", geo.certificate))?;
    ensure(geo.margin.abs() <= tol, || format!("geodesic margin {:.3e}", geo.margin))?;

    let mut least = f64::INFINITY;
    for amp in [0.25, 0.5, 1.0] {
        let (prho, pw) = eulerian::perturbed_path(&rho, &w, amp).map_err(err)?;
        let target = prho.atomized(prho.steps()).map_err(err)?;
        let rep = eulerian::eulerian_upper_bound_check(&spec, &mu0, &target, &prho, &pw, &opts).map_err(err)?;
        ensure(rep.certificate.pass, || format!("amplitude {amp}: {:?}", rep.certificate))?;
        ensure(rep.margin > 0.0, || format!("amplitude {amp}: margin {:.3e}", rep.margin))?;
        least = least.min(rep.margin);
    }
    Ok(format!("rate {rate:.3}, geodesic margin {:.1e} (allowance {tol:.1e}), least perturbed margin {least:.3e}", geo.margin))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let window = vec![axis_with_spacing(-8.0, 8.0, 0.01)];
    let samples: Vec<DualitySample> = (0..50)
        .map(|_| DualitySample {
            y: vec![rng.gen_range(-2.0..2.0)],
            v: vec![rng.gen_range(-2.0..2.0)],
            x: vec![rng.gen_range(-2.0..2.0)],
        })
        .collect();
    let quad = costs::verify_cost_dualities(&CostSpec::quadratic(1.0, 1.0).map_err(err)?, &samples, &window).map_err(err)?;
    ensure(quad.max_violation() <= 1e-6, || format!("quadratic {quad:?}"))?;

    let l0 = GridFunction::from_fn(vec![axis_with_spacing(-4.0, 4.0, 0.01)], Convexity::Convex, |p| p[0].abs()).map_err(err)?;
    let spec = CostSpec::new(LagrangianSpec::state_independent(ScalarField::Grid(l0)).map_err(err)?, 1.0).map_err(err)?;
    let abs = costs::verify_cost_dualities(&spec, &samples, &window).map_err(err)?;
    ensure(abs.max_violation() <= abs.grid_bound, || format!("|p| {abs:?}"))?;
    Ok(format!(
        "quadratic {:.1e}; |p| {:.1e} within grid bound {:.1e}",
        quad.max_violation(),
        abs.max_violation(),
        abs.grid_bound
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("exact transport duality", 10.0, criterion_1),
        ("conjugation", 5.0, criterion_2),
        ("closed-form costs", 30.0, criterion_3),
        ("ballistic interpolation", 5.0, criterion_4),
        ("value-function duality", 60.0, criterion_5),
        ("reverse interpolation", 60.0, criterion_6),
        ("map support", 30.0, criterion_7),
        ("symplectic integrator", 10.0, criterion_8),
        ("eulerian bound", 60.0, criterion_9),
        ("cost dualities", 30.0, criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(k + 1)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let timing = format!("{secs:.2}s of {budget:.0}s");
        match outcome {
            Ok(detail) if secs <= *budget => println!("criterion {:>2} {name}: PASS ({timing}) {detail}", k + 1),
            Ok(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL over time budget ({timing}) {detail}", k + 1);
            }
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({timing}) {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
