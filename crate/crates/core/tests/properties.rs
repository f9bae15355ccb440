mod common;

use pressureless::distance::w1;
use pressureless::potential::{build_profile, minimize_profile, potential_value};
use pressureless::sticky::discretize;
use pressureless::{Endpoints, InitialData, Side, Solver, SpreadMode, Tolerances, Weight};
use proptest::prelude::*;

fn modes() -> impl Strategy<Value = SpreadMode> {
    prop_oneof![
        Just(SpreadMode::Undamped),
        (0.5f64..5.0).prop_map(|tau| SpreadMode::damped(tau).unwrap()),
        (0.5f64..3.0).prop_map(|tau| SpreadMode::scaled(tau).unwrap()),
    ]
}

fn brute_mass(data: &InitialData, lo: f64, hi: f64) -> f64 {
    data.pieces()
        .iter()
        .map(|p| match *p {
            pressureless::Piece::Atom { x, mass, .. } => {
                if lo < x && x < hi {
                    mass
                } else {
                    0.0
                }
            }
            pressureless::Piece::Block { a, b, density, .. } => density * (hi.min(b) - lo.max(a)).max(0.0),
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_nondecreasing(data in common::mixed(6), ys in prop::collection::vec(-4.0f64..6.0, 2..40)) {
        let mut ys = ys;
        ys.sort_by(f64::total_cmp);
        for w in ys.windows(2) {
            prop_assert!(data.cdf(w[0], Side::Left) <= data.cdf(w[1], Side::Left) + 1e-15);
            prop_assert!(data.cdf(w[0], Side::Left) <= data.cdf(w[0], Side::Right));
        }
    }

    #[test]
    fn open_stieltjes_mass_matches_brute_force(data in common::mixed(6), a in -4.0f64..6.0, len in 0.0f64..5.0) {
        let got = data.stieltjes(a, a + len, Endpoints::OPEN, Weight::One).unwrap();
        prop_assert!((got - brute_mass(&data, a, a + len)).abs() <= 1e-12 * (1.0 + data.total_mass()));
    }

    #[test]
    fn infimum_bounds_a_label_scan(data in common::mixed(5), mode in modes(), x in -3.0f64..5.0, t in 0.05f64..3.0) {
        let p = build_profile(&data, x, t, mode).unwrap();
        let set = minimize_profile(&p, &Tolerances::default());
        let (lo, hi) = p.domain();
        let tol = 1e-9 * (1.0 + set.nu.abs());
        let mut best = f64::INFINITY;
        for k in 0..=400 {
            let y = lo + (hi - lo) * k as f64 / 400.0;
            let f = potential_value(&data, x, t, mode, y).unwrap();
            prop_assert!(f >= set.nu - tol, "F({y}) = {f} below nu = {}", set.nu);
            best = best.min(f);
        }
        // every reported minimizer attains the infimum
        for s in &set.states {
            prop_assert!((p.value(s.y, s.side) - set.nu).abs() <= 2e-11 * (1.0 + set.nu.abs()));
        }
        prop_assert!(best >= set.nu - tol);
    }

    #[test]
    fn minimizers_are_monotone_in_x(data in common::mixed(5), mode in modes(), t in 0.05f64..3.0,
                                    xs in prop::collection::vec(-3.0f64..5.0, 2..12)) {
        let solver = Solver::new(data, mode);
        let snap = solver.at(t).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let sel: Vec<_> = xs.iter().map(|&x| snap.evaluate(x).unwrap().selection).collect();
        for w in sel.windows(2) {
            prop_assert!(w[0].lower <= w[1].upper + 1e-12);
        }
    }

    #[test]
    fn mass_is_monotone_and_conserved(data in common::mixed(5), mode in modes(), t in 0.0f64..3.0,
                                      xs in prop::collection::vec(-6.0f64..8.0, 2..30)) {
        let solver = Solver::new(data.clone(), mode);
        let snap = solver.at(t).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let ms: Vec<f64> = xs.iter().map(|&x| snap.sample(x).unwrap().m).collect();
        let tol = 1e-12 * (1.0 + data.total_mass());
        for w in ms.windows(2) {
            prop_assert!(w[0] <= w[1] + tol);
        }
        let (lo, hi) = snap.hull();
        let total = snap.sample(hi + 1.0).unwrap().m - snap.sample(lo - 1.0).unwrap().m;
        prop_assert!((total - data.total_mass()).abs() <= 1e-10);
    }

    #[test]
    fn momentum_is_bounded_by_mass(data in common::mixed(5), mode in modes(), t in 0.0f64..3.0,
                                   x1 in -6.0f64..8.0, len in 0.0f64..4.0) {
        let solver = Solver::new(data.clone(), mode);
        let snap = solver.at(t).unwrap();
        let (a, b) = (snap.sample(x1).unwrap(), snap.sample(x1 + len).unwrap());
        let bound = data.max_speed() * snap.velocity_factor() * (b.m - a.m);
        prop_assert!((b.q - a.q).abs() <= bound + 1e-10);
        prop_assert!(a.u.abs() <= data.max_speed() * snap.velocity_factor() + 1e-12);
    }

    #[test]
    fn atomic_data_matches_the_oracle(data in common::atoms(6, 2.0), mode in modes(), t in 0.05f64..3.0) {
        let solver = Solver::new(data.clone(), mode);
        let snap = solver.at(t).unwrap();
        let state = discretize(&data, 1, mode).unwrap().evolve(t).unwrap();
        let positions: Vec<f64> = state.particles().iter().map(|p| p.x).collect();
        let (lo, hi) = snap.hull();
        for k in 0..=200 {
            let x = lo - 0.5 + (hi - lo + 1.0) * k as f64 / 200.0;
            if positions.iter().any(|&p| (p - x).abs() < 1e-9) {
                continue;
            }
            let gap = (snap.sample(x).unwrap().m - state.oracle_cdf(x, Side::Left)).abs();
            prop_assert!(gap <= 1e-9, "x = {x}: gap {gap}");
        }
    }

    #[test]
    fn sticky_dynamics_conserve_mass_and_momentum(data in common::mixed(5), mode in modes(), t in 0.0f64..4.0) {
        let start = discretize(&data, 50, mode).unwrap();
        let end = start.evolve(t).unwrap();
        prop_assert!((end.total_mass() - start.total_mass()).abs() <= 1e-12 * (1.0 + start.total_mass()));
        prop_assert!((end.total_v0_momentum() - start.total_v0_momentum()).abs() <= 1e-10);
        let xs: Vec<f64> = end.particles().iter().map(|p| p.x).collect();
        prop_assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn weak_damping_approaches_undamped(data in common::mixed(4), t in 0.1f64..2.0) {
        let tau = 1e6;
        let grid = |s: &Solver| {
            let snap = s.at(t).unwrap();
            snap.extract_measure(&snap.default_grid(256)).unwrap()
        };
        let damped = grid(&Solver::new(data.clone(), SpreadMode::damped(tau).unwrap()));
        let free = grid(&Solver::new(data.clone(), SpreadMode::Undamped));
        let bound = data.total_mass() * data.max_speed() * t * t / (2.0 * tau);
        prop_assert!(w1(&damped, &free) <= bound + 1e-9);
    }
}
