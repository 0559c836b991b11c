//! Plant constants, the cone-bounded input nonlinearities, the spatial grid,
//! the forwarding gain `M` and the discrete state.
//!
//! The plant is a scalar stable ODE `z' = -a z + sigma(u)` feeding the inflow
//! boundary of the transport equation `w_t + lambda w_x = 0` on `[0, 1]`
//! through `w(t, 0) = w(t, 1) + gamma z(t)`.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Plant and controller constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    a: T,
    lambda: T,
    gamma: T,
    mu: T,
}

impl<T: Scalar> Params<T> {
    /// Validated constructor: `a > 0`, `lambda > 0`, `mu > 0`, `gamma != 0`.
    pub fn new(a: T, lambda: T, gamma: T, mu: T) -> Result<Self> {
        let p = Self::degenerate(a, lambda, gamma, mu)?;
        if gamma == T::zero() {
            return Err(Error::InvalidParams("gamma must be nonzero".into()));
        }
        if mu <= T::zero() {
            return Err(Error::InvalidParams(format!("mu must be > 0, got {mu}")));
        }
        Ok(p)
    }

    /// Constructor for decoupled verification scenarios.
    ///
    /// Accepts `gamma = 0` (no boundary coupling, `M = 0`) and `mu = 0`
    /// (open loop). `a` and `lambda` must still be positive.
    pub fn degenerate(a: T, lambda: T, gamma: T, mu: T) -> Result<Self> {
        for (name, v) in [("a", a), ("lambda", lambda), ("gamma", gamma), ("mu", mu)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if a <= T::zero() {
            return Err(Error::InvalidParams(format!("a must be > 0, got {a}")));
        }
        if lambda <= T::zero() {
            return Err(Error::InvalidParams(format!("lambda must be > 0, got {lambda}")));
        }
        if mu < T::zero() {
            return Err(Error::InvalidParams(format!("mu must be >= 0, got {mu}")));
        }
        Ok(Self { a, lambda, gamma, mu })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// Same plant with a different feedback gain.
    pub fn with_mu(&self, mu: T) -> Result<Self> {
        Self::new(self.a, self.lambda, self.gamma, mu)
    }
}

/// Catalog of cone-bounded nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaKind<T> {
    /// `s -> rho s`.
    Linear { rho: T },
    /// `s -> rho clamp(s, lo, hi)`.
    Saturation { rho: T, lo: T, hi: T },
    /// `s -> theta atan(rho s)`.
    Arctan { theta: T, rho: T },
}

/// A cone-bounded input nonlinearity together with its Lipschitz constant.
///
/// Every catalog entry vanishes only at the origin, is nondecreasing and is
/// globally Lipschitz with constant [`ConeBounded::m`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeBounded<T> {
    kind: SigmaKind<T>,
    m: T,
}

impl<T: Scalar> ConeBounded<T> {
    pub fn linear(rho: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::InvalidSigma(format!(
                "linear slope must be positive for a nondecreasing map, got {rho}"
            )));
        }
        Ok(Self { kind: SigmaKind::Linear { rho }, m: rho.abs() })
    }

    /// Saturation between `rho lo` and `rho hi`; requires `lo < 0 < hi`.
    pub fn saturation(rho: T, lo: T, hi: T) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::InvalidSigma(format!("saturation slope must be > 0, got {rho}")));
        }
        if !(lo < hi) {
            return Err(Error::InvalidSigma(format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if !(lo < T::zero() && hi > T::zero()) {
            return Err(Error::InvalidSigma(format!(
                "saturation must vanish only at 0: need lo < 0 < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { kind: SigmaKind::Saturation { rho, lo, hi }, m: rho })
    }

    /// `theta atan(rho s)`; requires `theta rho > 0`.
    pub fn arctan(theta: T, rho: T) -> Result<Self> {
        let slope = theta * rho;
        if !(slope > T::zero()) || !slope.is_finite() {
            return Err(Error::InvalidSigma(format!(
                "arctan needs theta*rho > 0, got theta={theta}, rho={rho}"
            )));
        }
        Ok(Self { kind: SigmaKind::Arctan { theta, rho }, m: slope })
    }

    pub fn from_kind(kind: SigmaKind<T>) -> Result<Self> {
        match kind {
            SigmaKind::Linear { rho } => Self::linear(rho),
            SigmaKind::Saturation { rho, lo, hi } => Self::saturation(rho, lo, hi),
            SigmaKind::Arctan { theta, rho } => Self::arctan(theta, rho),
        }
    }

    pub fn kind(&self) -> SigmaKind<T> {
        self.kind
    }

    /// Global Lipschitz constant (slope at the origin for every entry).
    pub fn m(&self) -> T {
        self.m
    }

    #[inline]
    pub fn eval(&self, s: T) -> T {
        match self.kind {
            SigmaKind::Linear { rho } => rho * s,
            SigmaKind::Saturation { rho, lo, hi } => rho * s.max(lo).min(hi),
            SigmaKind::Arctan { theta, rho } => theta * (rho * s).atan(),
        }
    }
}

/// Uniform node grid on `[0, 1]` with `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    n: usize,
    dx: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n}")));
        }
        Ok(Self { n, dx: T::one() / from_usize(n) })
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Node `i`, computed as `i / n` so the last node is exactly 1.
    #[inline]
    pub fn node(&self, i: usize) -> T {
        from_usize::<T>(i) / from_usize(self.n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    /// Samples a function at every node.
    pub fn sample<F: Fn(T) -> T>(&self, f: F) -> Vec<T> {
        self.nodes().map(f).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: len });
        }
        Ok(())
    }
}

/// Closed-form forwarding gain, the solution of `a M = lambda M'`,
/// `M(0) = M(1) + gamma`.
#[inline]
pub fn gain_closed_form<T: Scalar>(params: &Params<T>, x: T) -> T {
    let r = params.a / params.lambda;
    // 1 - e^r = -(e^r - 1)
    -params.gamma * (r * x).exp() / r.exp_m1()
}

/// The gain `M` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GainProfile<T> {
    samples: Vec<T>,
    params: Params<T>,
    grid: Grid<T>,
}

impl<T: Scalar> GainProfile<T> {
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// `M` at an arbitrary point, closed form.
    pub fn eval(&self, x: T) -> T {
        gain_closed_form(&self.params, x)
    }

    /// `M' = (a / lambda) M`, closed form.
    pub fn derivative(&self, x: T) -> T {
        self.params.a / self.params.lambda * self.eval(x)
    }

    /// Boundary identity defect `M(0) - M(1) - gamma` on the samples.
    pub fn boundary_defect(&self) -> T {
        self.samples[0] - self.samples[self.grid.cells()] - self.params.gamma
    }

    /// See [`gain_residual`].
    pub fn residual(&self) -> Result<T> {
        gain_residual(&self.params, &self.grid, &self.samples)
    }
}

/// Samples the closed-form gain at every node of `grid`.
pub fn build_gain<T: Scalar>(params: &Params<T>, grid: &Grid<T>) -> GainProfile<T> {
    GainProfile {
        samples: grid.sample(|x| gain_closed_form(params, x)),
        params: *params,
        grid: *grid,
    }
}

/// Max over interior nodes of `|a M_i - lambda (M_{i+1} - M_{i-1}) / (2 dx)|`.
///
/// Works on arbitrary samples so non-gain profiles can be checked too.
pub fn gain_residual<T: Scalar>(params: &Params<T>, grid: &Grid<T>, samples: &[T]) -> Result<T> {
    grid.check_len(samples.len())?;
    if grid.cells() < 4 {
        return Err(Error::InvalidGrid(format!(
            "gain residual needs at least 4 cells, got {}",
            grid.cells()
        )));
    }
    let two_dx = lit::<T>(2.0) * grid.dx();
    let res = samples
        .windows(3)
        .map(|s| (params.a * s[1] - params.lambda * (s[2] - s[0]) / two_dx).abs())
        .fold(T::zero(), T::max);
    Ok(res)
}

/// Discrete plant state: ODE value, nodal transport profile and time.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub z: T,
    pub w: Vec<T>,
    pub t: T,
}

impl<T: Scalar> State<T> {
    /// Validated constructor: `w` must match the grid and everything be finite.
    pub fn new(z: T, w: Vec<T>, t: T, grid: &Grid<T>) -> Result<Self> {
        grid.check_len(w.len())?;
        let s = Self { z, w, t };
        if !s.is_finite() {
            return Err(Error::NonFiniteState);
        }
        Ok(s)
    }

    pub fn zero(grid: &Grid<T>) -> Self {
        Self { z: T::zero(), w: vec![T::zero(); grid.len()], t: T::zero() }
    }

    /// Samples `w0` on the grid at `t = 0`.
    pub fn from_fn<F: Fn(T) -> T>(z: T, w0: F, grid: &Grid<T>) -> Result<Self> {
        Self::new(z, grid.sample(w0), T::zero(), grid)
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.t.is_finite() && self.w.iter().all(|v| v.is_finite())
    }

    /// `|w[0] - w[n] - gamma z|`.
    pub fn compat_defect(&self, gamma: T) -> T {
        let n = self.w.len() - 1;
        (self.w[0] - self.w[n] - gamma * self.z).abs()
    }

    /// Relative tolerance `1e-9 (1 + |gamma z| + |w[0]| + |w[n]|)`.
    pub fn compat_tol(&self, gamma: T) -> T {
        let n = self.w.len() - 1;
        lit::<T>(1e-9) * (T::one() + (gamma * self.z).abs() + self.w[0].abs() + self.w[n].abs())
    }

    pub fn is_compatible(&self, gamma: T) -> bool {
        self.compat_defect(gamma) <= self.compat_tol(gamma)
    }

    pub(crate) fn require_compatible(&self, gamma: T) -> Result<()> {
        let defect = self.compat_defect(gamma);
        let tol = self.compat_tol(gamma);
        if defect > tol {
            return Err(Error::Incompatible { defect: to_f64(defect), tol: to_f64(tol) });
        }
        Ok(())
    }

    /// `(self - other)` componentwise; time is taken from `self`.
    pub fn difference(&self, other: &Self) -> Self {
        Self {
            z: self.z - other.z,
            w: self.w.iter().zip(&other.w).map(|(a, b)| *a - *b).collect(),
            t: self.t,
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self { z: alpha * self.z, w: self.w.iter().map(|v| alpha * *v).collect(), t: self.t }
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            z: self.z + other.z,
            w: self.w.iter().zip(&other.w).map(|(a, b)| *a + *b).collect(),
            t: self.t,
        }
    }
}
