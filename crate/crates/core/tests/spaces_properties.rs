mod common;

use common::{dot_trapz, norm_x_sq_oracle, random_params, random_state, rng, sigma_catalog, trapz};
use forwarding_core::spaces::{energy_e1, energy_e2, l2_inner};
use forwarding_core::{ClosedLoop, Grid, Quadrature, State};
use proptest::prelude::*;
use rand::Rng;

fn system(seed: u64, n: usize) -> ClosedLoop<f64> {
    let mut r = rng(seed);
    let p = random_params(&mut r);
    let sigma = sigma_catalog()[(seed % 3) as usize];
    ClosedLoop::with_cells(p, sigma, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_is_a_quadratic_form(seed in 0u64..1000, alpha in -10.0f64..10.0) {
        let sys = system(seed, 64);
        let s = random_state(&mut rng(seed + 1), &sys);
        let v = sys.norm_x_sq(&s).unwrap();
        let va = sys.norm_x_sq(&s.scaled(alpha)).unwrap();
        prop_assert!((va - alpha * alpha * v).abs() <= 1e-12 * (1.0 + va.abs()));
        prop_assert!((v - norm_x_sq_oracle(&sys, &s)).abs() <= 1e-12 * (1.0 + v));
    }

    #[test]
    fn feedback_is_linear(seed in 0u64..1000, alpha in -5.0f64..5.0) {
        let sys = system(seed, 64);
        let mut r = rng(seed + 2);
        let s1 = random_state(&mut r, &sys);
        let s2 = random_state(&mut r, &sys);
        let lhs = sys.feedback(&s1.sum(&s2)).unwrap();
        let rhs = sys.feedback(&s1).unwrap() + sys.feedback(&s2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let scaled = sys.feedback(&s1.scaled(alpha)).unwrap();
        prop_assert!((scaled - alpha * sys.feedback(&s1).unwrap()).abs() <= 1e-12 * (1.0 + scaled.abs()));
    }

    #[test]
    fn norm_equivalence(seed in 0u64..1000) {
        let sys = system(seed, 100);
        let p = sys.params();
        let m = sys.sigma().m();
        let k = sys.gain_norm_sq();
        let c = p.mu() * m;
        // Young: |w - M z|^2 <= 2|w|^2 + 2 K z^2, and >= (1 - d)|w|^2 + (1 - 1/d) K z^2
        let c2 = (p.a() + 2.0 * c * k).max(2.0 * c);
        let d = 1.0 / (1.0 + p.a() / (2.0 * c * k));
        let c1 = (p.a() / 2.0).min(c * (1.0 - d));
        let mut r = rng(seed + 3);
        for _ in 0..5 {
            let mut s = random_state(&mut r, &sys);
            s.z *= r.gen_range(0.0..3.0);
            let plain = s.z * s.z + dot_trapz(&s.w, &s.w);
            let v = sys.norm_x_sq(&s).unwrap();
            prop_assert!(c1 * plain <= v * (1.0 + 1e-12));
            prop_assert!(v <= c2 * plain * (1.0 + 1e-12));
        }
    }

    #[test]
    fn energy_ordering(seed in 0u64..1000) {
        let sys = system(seed, 80);
        let s = random_state(&mut rng(seed + 4), &sys);
        let q = sys.quadrature();
        let e1 = energy_e1(&s.w, q).unwrap();
        let e2 = energy_e2(&s.w, q).unwrap();
        prop_assert!(e2 <= e1 * (1.0 + 1e-14));
        prop_assert!(e2 >= (-1.0f64).exp() * e1 * (1.0 - 1e-14));
    }
}

#[test]
fn constants_integrate_exactly() {
    for n in [2, 7, 10, 333, 4096] {
        let q = Quadrature::new(&Grid::<f64>::new(n).unwrap());
        let ones = vec![1.0; n + 1];
        assert!((q.integrate(&ones).unwrap() - 1.0).abs() <= 1e-14);
        assert!((trapz(&ones) - 1.0).abs() <= 1e-14);
    }
}

#[test]
fn norm_is_zero_only_at_origin() {
    let sys = system(5, 40);
    assert_eq!(sys.norm_x_sq(&State::zero(sys.grid())).unwrap(), 0.0);
    let mut s = State::zero(sys.grid());
    s.w[17] = 1e-3;
    assert!(sys.norm_x_sq(&s).unwrap() > 0.0);
    let on_manifold = State::new(1.0, sys.gain().samples().to_vec(), 0.0, sys.grid()).unwrap();
    assert!((sys.norm_x_sq(&on_manifold).unwrap() - sys.params().a()).abs() < 1e-14);
}

#[test]
fn inner_product_matches_trapezoid() {
    let g = Grid::<f64>::new(50).unwrap();
    let q = Quadrature::new(&g);
    let f = g.sample(|x| x.exp());
    let h = g.sample(|x| (3.0 * x).cos());
    assert!((l2_inner(&f, &h, &q).unwrap() - dot_trapz(&f, &h)).abs() < 1e-15);
}
