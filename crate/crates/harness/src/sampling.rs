//! Random plants and compatible states for the property checks.

use std::f64::consts::PI;

use forwarding_core::{ClosedLoop64, Params64, State64};
use rand::Rng;

pub fn random_params<R: Rng>(rng: &mut R) -> Params64 {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Params64::new(rng.gen_range(0.2..3.0), rng.gen_range(0.3..3.0), sign * rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0))
        .expect("sampled ranges are valid")
}

/// `z ~ U(-2, 2)` and `w = c0 + sum_{k <= 2} (a_k sin 2 pi k x + b_k cos 2 pi k x) - gamma z x`,
/// which satisfies `w(0) = w(1) + gamma z`.
pub fn random_state<R: Rng>(rng: &mut R, sys: &ClosedLoop64) -> State64 {
    let gamma = sys.params().gamma();
    let z: f64 = rng.gen_range(-2.0..2.0);
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let w0 = |x: f64| {
        let (s1, c1) = (2.0 * PI * x).sin_cos();
        let (s2, c2) = (4.0 * PI * x).sin_cos();
        c0 + c[0] * s1 + c[1] * c1 + c[2] * s2 + c[3] * c2 - gamma * z * x
    };
    State64::from_fn(z, w0, sys.grid()).expect("finite samples on a valid grid")
}
