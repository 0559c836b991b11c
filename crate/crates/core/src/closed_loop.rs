use crate::error::{Error, Result};
use crate::model::{build_gain, ConeBounded, GainProfile, Grid, Params, State};
use crate::scalar::Scalar;
use crate::spaces::{self, Quadrature};

/// Everything needed to evaluate the closed loop on one grid: plant
/// constants, nonlinearity, gain samples and quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoop<T> {
    params: Params<T>,
    sigma: ConeBounded<T>,
    gain: GainProfile<T>,
    quad: Quadrature<T>,
    gain_norm_sq: T,
}

impl<T: Scalar> ClosedLoop<T> {
    pub fn new(params: Params<T>, sigma: ConeBounded<T>, grid: Grid<T>) -> Self {
        let gain = build_gain(&params, &grid);
        let quad = Quadrature::new(&grid);
        let gain_norm_sq = quad.inner_unchecked(gain.samples(), gain.samples());
        Self { params, sigma, gain, quad, gain_norm_sq }
    }

    /// Same plant on `n` cells.
    pub fn with_cells(params: Params<T>, sigma: ConeBounded<T>, n: usize) -> Result<Self> {
        Ok(Self::new(params, sigma, Grid::new(n)?))
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn sigma(&self) -> &ConeBounded<T> {
        &self.sigma
    }

    pub fn gain(&self) -> &GainProfile<T> {
        &self.gain
    }

    pub fn grid(&self) -> &Grid<T> {
        self.quad.grid()
    }

    pub fn quadrature(&self) -> &Quadrature<T> {
        &self.quad
    }

    /// Trapezoid value of `||M||^2`.
    pub fn gain_norm_sq(&self) -> T {
        self.gain_norm_sq
    }

    pub fn check_state(&self, state: &State<T>) -> Result<()> {
        self.grid().check_len(state.w.len())?;
        if !state.is_finite() {
            return Err(Error::NonFiniteState);
        }
        Ok(())
    }

    pub fn feedback(&self, state: &State<T>) -> Result<T> {
        spaces::feedback_u(state, &self.gain, &self.params, &self.quad)
    }

    /// Feedback from nodal values without a [`State`] wrapper.
    pub(crate) fn feedback_raw(&self, z: T, w: &[T]) -> T {
        let m = self.gain.samples();
        self.params.mu() * self.quad.inner_shifted(w, z, m, m)
    }

    pub fn inner_x(&self, s1: &State<T>, s2: &State<T>) -> Result<T> {
        spaces::inner_x(s1, s2, &self.gain, &self.params, &self.sigma, &self.quad)
    }

    pub fn norm_x_sq(&self, state: &State<T>) -> Result<T> {
        self.inner_x(state, state)
    }

    pub fn norm_x(&self, state: &State<T>) -> Result<T> {
        Ok(self.norm_x_sq(state)?.max(T::zero()).sqrt())
    }

    /// `-a z + sigma(u)`.
    #[inline]
    pub fn z_rate(&self, z: T, u: T) -> T {
        -self.params.a() * z + self.sigma.eval(u)
    }
}
