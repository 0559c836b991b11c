mod common;

use common::{gain_oracle, random_params, rng};
use forwarding_core::{build_gain, gain_residual, ConeBounded, Grid, Params};
use proptest::prelude::*;

fn sigma_strategy() -> impl Strategy<Value = ConeBounded<f64>> {
    prop_oneof![
        (0.05f64..5.0).prop_map(|rho| ConeBounded::linear(rho).unwrap()),
        (0.05f64..5.0, -3.0f64..-0.01, 0.01f64..3.0)
            .prop_map(|(rho, lo, hi)| ConeBounded::saturation(rho, lo, hi).unwrap()),
        (0.05f64..5.0, 0.05f64..5.0).prop_map(|(theta, rho)| ConeBounded::arctan(theta, rho).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sigma_is_monotone_and_lipschitz(sigma in sigma_strategy(), s in -50.0f64..50.0, t in -50.0f64..50.0) {
        let ds = sigma.eval(s) - sigma.eval(t);
        prop_assert!(ds * (s - t) >= 0.0);
        prop_assert!(ds.abs() <= sigma.m() * (s - t).abs() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn sigma_vanishes_only_at_zero(sigma in sigma_strategy(), s in prop::num::f64::NORMAL) {
        prop_assume!(s.is_finite() && s != 0.0);
        prop_assert_eq!(sigma.eval(0.0), 0.0);
        prop_assert!(sigma.eval(s) != 0.0);
        prop_assert_eq!(sigma.eval(s).signum(), s.signum());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_boundary_identity_and_sign(
        a in 0.05f64..5.0,
        lambda in 0.1f64..5.0,
        gamma in prop_oneof![-5.0f64..-0.01, 0.01f64..5.0],
        n in 4usize..300,
    ) {
        let p = Params::new(a, lambda, gamma, 1.0).unwrap();
        let grid = Grid::new(n).unwrap();
        let m = build_gain(&p, &grid);
        prop_assert!(m.boundary_defect().abs() <= 1e-12 * (1.0 + gamma.abs()));
        for (x, v) in grid.nodes().zip(m.samples()) {
            prop_assert!(gamma * v < 0.0);
            let exact = gain_oracle(a, lambda, gamma, x);
            prop_assert!((v - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
    }
}

#[test]
fn gain_invariants_for_twenty_parameter_sets() {
    let mut r = rng(11);
    for _ in 0..20 {
        let p = random_params(&mut r);
        let m = build_gain(&p, &Grid::new(128).unwrap());
        assert!((m.samples()[0] - m.samples()[128] - p.gamma()).abs() <= 1e-12);
        assert!(m.samples().iter().all(|v| v * p.gamma() < 0.0));
    }
}

fn observed_order(p: &Params<f64>, n: usize) -> f64 {
    let coarse = build_gain(p, &Grid::new(n).unwrap()).residual().unwrap();
    let fine = build_gain(p, &Grid::new(2 * n).unwrap()).residual().unwrap();
    (coarse / fine).log2()
}

#[test]
fn gain_residual_is_second_order() {
    let mut r = rng(12);
    let mut sets = vec![Params::new(1.0, 1.0, 1.0, 1.0).unwrap()];
    sets.extend((0..20).map(|_| random_params(&mut r)));
    for p in &sets {
        for n in [32, 64, 128] {
            let q = observed_order(p, n);
            assert!((1.8..=2.2).contains(&q), "order {q} at n={n} for {p:?}");
        }
    }
}

#[test]
fn residual_of_non_solution_does_not_vanish() {
    let p = Params::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let grid = Grid::new(64).unwrap();
    let ones = vec![1.0f64; 65];
    assert!((gain_residual(&p, &grid, &ones).unwrap() - 1.0).abs() < 1e-15);
    let wrong = grid.sample(|x| gain_oracle(2.0, 1.0, 1.0, x));
    assert!(gain_residual(&p, &grid, &wrong).unwrap() > 0.1);
}
