use ballistic_core::costs::CostSpec;
use ballistic_core::eulerian::{self, CellGrid};
use ballistic_core::grid::{legendre_conjugate, legendre_conjugate_scan, linspace};
use ballistic_core::hamiltonian::flow;
use ballistic_core::interpolation::interpolate_min;
use ballistic_core::lagrangian::{hamiltonian_of, LagrangianSpec};
use ballistic_core::ot::{self, Direction};
use ballistic_core::{Convexity, DiscreteMeasure, GridFunction};
use proptest::prelude::*;

fn line_measure(xs: &[f64], ws: &[f64]) -> DiscreteMeasure {
    let total: f64 = ws.iter().sum();
    DiscreteMeasure::new(xs.iter().map(|x| vec![*x]).collect(), ws.iter().map(|w| w / total).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn accelerated_conjugate_agrees_with_scan(values in prop::collection::vec(-3.0..3.0f64, 5..40), lo in -3.0..0.0f64) {
        let n = values.len();
        let f = GridFunction::new(vec![linspace(-1.0, 1.0, n)], values, Convexity::Convex).unwrap();
        let dual = vec![linspace(lo, lo + 4.0, 57)];
        let a = legendre_conjugate(&f, &dual).unwrap();
        let b = legendre_conjugate_scan(&f, &dual).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn fenchel_young_and_biconjugate_below(c in 0.2..3.0f64, s in -1.0..1.0f64) {
        let axis = linspace(-2.0, 2.0, 81);
        let f = GridFunction::from_fn(vec![axis.clone()], Convexity::Convex, |x| c * x[0].powi(4) + s * x[0]).unwrap();
        let fs = legendre_conjugate(&f, &[linspace(-6.0, 6.0, 121)]).unwrap();
        for (i, x) in axis.iter().enumerate() {
            for (j, p) in fs.axes()[0].iter().enumerate() {
                prop_assert!(f.values()[i] + fs.values()[j] >= x * p - 1e-12);
            }
        }
        let fss = legendre_conjugate(&fs, &[axis]).unwrap();
        for (a, b) in fss.values().iter().zip(f.values()) {
            prop_assert!(*a <= b + 1e-12);
        }
    }

    #[test]
    fn reflection_swaps_least_and_greatest(seed in 0u64..1000) {
        let xs: Vec<f64> = (0..4).map(|k| ((seed * 7 + k * 13) % 17) as f64 / 4.0 - 2.0).collect();
        let ys: Vec<f64> = (0..3).map(|k| ((seed * 11 + k * 5) % 19) as f64 / 4.0 - 2.0).collect();
        let mu = line_measure(&xs, &[1.0, 2.0, 1.0, 3.0]);
        let nu = line_measure(&ys, &[2.0, 1.0, 1.0]);
        let lo = ot::solve(&ot::bilinear_cost(&mu, &nu).unwrap(), &mu, &nu, Direction::Min).unwrap();
        let r = mu.reflected();
        let hi = ot::solve(&ot::bilinear_cost(&r, &nu).unwrap(), &r, &nu, Direction::Max).unwrap();
        prop_assert!((lo.value + hi.value).abs() <= 1e-12);
    }

    #[test]
    fn symplectic_flow_reverses(x0 in -2.0..2.0f64, v0 in -2.0..2.0f64, k in 0.1..2.0f64) {
        let l = LagrangianSpec::separable(
            ballistic_core::field::ScalarField::Quadratic { scale: 1.0 },
            ballistic_core::field::ScalarField::Quadratic { scale: k },
        ).unwrap();
        let h = hamiltonian_of(&l, None).unwrap();
        let fwd = flow(&h, &[x0], &[v0], 1.0, 64).unwrap();
        let back_v: Vec<f64> = fwd.final_costate().iter().map(|v| -v).collect();
        let back = flow(&h, fwd.final_state(), &back_v, 1.0, 64).unwrap();
        prop_assert!((back.final_state()[0] - x0).abs() <= 1e-10);
        prop_assert!((back.final_costate()[0] + v0).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_interpolation_bounds_exact_value(a in -1.5..0.0f64, b in 0.0..1.5f64, c in -1.0..1.0f64, d in 1.0..2.0f64, w in 0.2..0.8f64) {
        let spec = CostSpec::quadratic(1.0, 1.0).unwrap();
        let mu = line_measure(&[a, b], &[w, 1.0 - w]);
        let nu = line_measure(&[c, d], &[0.5, 0.5]);
        let r = interpolate_min(&spec, &mu, &nu, &[linspace(-5.0, 5.0, 101)]).unwrap();
        prop_assert!(r.value >= r.ballistic_value - 1e-9);
        // Each intermediate point lies within one spacing of the free-motion start.
        prop_assert!(r.value - r.ballistic_value <= 0.1 * 0.1 + 1e-9);
        let mass: f64 = r.intermediate.weights().iter().sum();
        prop_assert!((mass - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn displacement_conserves_mass(a in -1.0..0.0f64, b in 0.5..1.5f64, shift in -0.5..0.5f64) {
        let nu0 = line_measure(&[a, b], &[0.5, 0.5]);
        let nu_t = line_measure(&[a + shift, b + 0.5 * shift], &[0.5, 0.5]);
        let grid = CellGrid::new(-3.0, 3.0, 120).unwrap();
        let speed = eulerian::displacement_speed(&nu0, &nu_t, 1.0, &grid, 32).unwrap();
        let steps = 2 * eulerian::min_steps(1.05 * speed, 1.0, grid.dx());
        let (rho, w) = eulerian::displacement_path(&nu0, &nu_t, 1.0, steps, &grid).unwrap();
        prop_assert!(rho.mass_drift() <= 1e-12);
        prop_assert!(eulerian::continuity_residual(&rho, &w).unwrap() <= 1e-9);
        prop_assert!(rho.mass(steps).iter().all(|m| *m >= 0.0));
    }
}

#[test]
fn normalization_window() {
    let pts = vec![vec![0.0], vec![1.0]];
    let m = DiscreteMeasure::normalized(pts.clone(), vec![0.5, 0.5 + 5e-7], 1e-6).unwrap();
    assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(DiscreteMeasure::normalized(pts, vec![0.5, 0.51], 1e-6).is_err());
}
