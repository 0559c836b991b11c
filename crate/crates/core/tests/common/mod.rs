#![allow(dead_code)]

use forwarding_core::{ClosedLoop, ConeBounded, Params, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_params() -> Params<f64> {
    Params::new(1.0, 1.0, 1.0, 1.0).unwrap()
}

pub fn arctan() -> ConeBounded<f64> {
    ConeBounded::arctan(1.0, 1.0).unwrap()
}

pub fn sigma_catalog() -> [ConeBounded<f64>; 3] {
    [
        ConeBounded::linear(1.0).unwrap(),
        ConeBounded::saturation(1.0, -1.0, 1.0).unwrap(),
        ConeBounded::arctan(1.0, 1.0).unwrap(),
    ]
}

pub fn reference_w0(x: f64) -> f64 {
    (2.0 * PI * x).sin() - x
}

pub fn random_params(rng: &mut ChaCha8Rng) -> Params<f64> {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Params::new(
        rng.gen_range(0.2..3.0),
        rng.gen_range(0.3..3.0),
        sign * rng.gen_range(0.2..3.0),
        rng.gen_range(0.2..3.0),
    )
    .unwrap()
}

/// Low-mode trigonometric profile plus the linear ramp that makes it
/// satisfy `w(0) = w(1) + gamma z`.
pub fn random_state(rng: &mut ChaCha8Rng, sys: &ClosedLoop<f64>) -> State<f64> {
    let gamma = sys.params().gamma();
    let z: f64 = rng.gen_range(-2.0..2.0);
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    State::from_fn(
        z,
        |x| {
            let (s1, c1) = (2.0 * PI * x).sin_cos();
            let (s2, c2) = (4.0 * PI * x).sin_cos();
            c0 + c[0] * s1 + c[1] * c1 + c[2] * s2 + c[3] * c2 - gamma * z * x
        },
        sys.grid(),
    )
    .unwrap()
}

/// `M(x) = gamma e^{a x / lambda} / (1 - e^{a / lambda})`, written out directly.
pub fn gain_oracle(a: f64, lambda: f64, gamma: f64, x: f64) -> f64 {
    gamma * (a * x / lambda).exp() / (1.0 - (a / lambda).exp())
}

/// Trapezoid rule with weights spelled out.
pub fn trapz(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let dx = 1.0 / n as f64;
    f.iter().enumerate().map(|(i, v)| if i == 0 || i == n { 0.5 * dx * v } else { dx * v }).sum()
}

pub fn dot_trapz(f: &[f64], g: &[f64]) -> f64 {
    let p: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    trapz(&p)
}

pub fn norm_x_sq_oracle(sys: &ClosedLoop<f64>, s: &State<f64>) -> f64 {
    let p = sys.params();
    let m: Vec<f64> = sys.grid().nodes().map(|x| gain_oracle(p.a(), p.lambda(), p.gamma(), x)).collect();
    let d: Vec<f64> = s.w.iter().zip(&m).map(|(w, mi)| w - mi * s.z).collect();
    p.a() * s.z * s.z + p.mu() * sys.sigma().m() * dot_trapz(&d, &d)
}
