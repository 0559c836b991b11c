//! Discrete function-space numerics on the node grid: composite trapezoid
//! quadrature, the weighted state inner product, the feedback value and the
//! energy functionals.

use crate::error::Result;
use crate::model::{ConeBounded, GainProfile, Grid, Params, State};
use crate::scalar::{lit, Scalar};

/// Composite trapezoid rule on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature<T> {
    grid: Grid<T>,
    weights: Vec<T>,
    // trapezoid weights times e^{-x}, for E2
    decay_weights: Vec<T>,
}

impl<T: Scalar> Quadrature<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let n = grid.cells();
        let dx = grid.dx();
        let half = lit::<T>(0.5) * dx;
        let weights: Vec<T> =
            (0..=n).map(|i| if i == 0 || i == n { half } else { dx }).collect();
        let decay_weights =
            weights.iter().zip(grid.nodes()).map(|(w, x)| *w * (-x).exp()).collect();
        Self { grid: *grid, weights, decay_weights }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integral of nodal values over `[0, 1]`.
    pub fn integrate(&self, f: &[T]) -> Result<T> {
        self.grid.check_len(f.len())?;
        Ok(self.trapezoid(|i| f[i]))
    }

    /// Trapezoid sum of `f(x_i)` over the nodes, with `dx` factored out.
    #[inline]
    fn trapezoid<F: Fn(usize) -> T>(&self, f: F) -> T {
        let n = self.grid.cells();
        let interior = (1..n).fold(T::zero(), |acc, i| acc + f(i));
        self.grid.dx() * (interior + lit::<T>(0.5) * (f(0) + f(n)))
    }

    pub(crate) fn inner_unchecked(&self, f: &[T], g: &[T]) -> T {
        self.trapezoid(|i| f[i] * g[i])
    }

    /// `<f - c g, h>` without a temporary.
    pub(crate) fn inner_shifted(&self, f: &[T], c: T, g: &[T], h: &[T]) -> T {
        self.trapezoid(|i| (f[i] - c * g[i]) * h[i])
    }
}

/// Trapezoid approximation of `\int_0^1 f g dx`.
pub fn l2_inner<T: Scalar>(f: &[T], g: &[T], q: &Quadrature<T>) -> Result<T> {
    q.grid.check_len(f.len())?;
    q.grid.check_len(g.len())?;
    Ok(q.inner_unchecked(f, g))
}

/// Feedback `u = mu <w - M z, M>`.
pub fn feedback_u<T: Scalar>(
    state: &State<T>,
    gain: &GainProfile<T>,
    params: &Params<T>,
    q: &Quadrature<T>,
) -> Result<T> {
    q.grid.check_len(state.w.len())?;
    q.grid.check_len(gain.samples().len())?;
    let m = gain.samples();
    Ok(params.mu() * q.inner_shifted(&state.w, state.z, m, m))
}

/// Weighted state inner product `a z1 z2 + mu m <w1 - M z1, w2 - M z2>`.
pub fn inner_x<T: Scalar>(
    s1: &State<T>,
    s2: &State<T>,
    gain: &GainProfile<T>,
    params: &Params<T>,
    sigma: &ConeBounded<T>,
    q: &Quadrature<T>,
) -> Result<T> {
    q.grid.check_len(s1.w.len())?;
    q.grid.check_len(s2.w.len())?;
    q.grid.check_len(gain.samples().len())?;
    let m = gain.samples();
    let pairing = q.trapezoid(|i| (s1.w[i] - m[i] * s1.z) * (s2.w[i] - m[i] * s2.z));
    Ok(params.a() * s1.z * s2.z + params.mu() * sigma.m() * pairing)
}

/// `||(z, w)||_X^2 = a z^2 + mu m ||w - M z||^2`. This is the closed-loop
/// Lyapunov function.
pub fn norm_x_sq<T: Scalar>(
    state: &State<T>,
    gain: &GainProfile<T>,
    params: &Params<T>,
    sigma: &ConeBounded<T>,
    q: &Quadrature<T>,
) -> Result<T> {
    inner_x(state, state, gain, params, sigma, q)
}

/// `E1 = \int w^2`.
pub fn energy_e1<T: Scalar>(w: &[T], q: &Quadrature<T>) -> Result<T> {
    l2_inner(w, w, q)
}

/// `E2 = \int e^{-x} w^2`.
pub fn energy_e2<T: Scalar>(w: &[T], q: &Quadrature<T>) -> Result<T> {
    q.grid.check_len(w.len())?;
    Ok(q.decay_weights.iter().zip(w).fold(T::zero(), |acc, (c, v)| acc + *c * *v * *v))
}

/// Forward-difference estimate of `\int (w')^2`. Plotting diagnostic only.
pub fn h1_seminorm_sq<T: Scalar>(w: &[T], grid: &Grid<T>) -> Result<T> {
    grid.check_len(w.len())?;
    let dx = grid.dx();
    Ok(w.windows(2).fold(T::zero(), |acc, p| {
        let d = (p[1] - p[0]) / dx;
        acc + d * d * dx
    }))
}
