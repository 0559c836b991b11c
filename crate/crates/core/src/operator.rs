//! The closed-loop generator `A(z, w) = (-a z + sigma(u), -lambda w')` on its
//! discrete domain, empirical dissipativity, the resolvent `(I - h A)^{-1}`
//! and the backward-Euler stepper built on it.
//!
//! The resolvent follows the constructive maximality argument: variation of
//! constants for `w + h lambda w' = rhs_w`, the boundary relation fixes
//! `w(0)` in terms of `z`, which leaves one monotone scalar equation for `z`
//! solved by bisection.

use crate::closed_loop::ClosedLoop;
use crate::error::{Error, Result};
use crate::model::State;
use crate::scalar::{lit, to_f64, Scalar};
use crate::trajectory::{snapshot_of, step_count, SnapshotPlan, Trajectory, TrajectoryRow};

/// Fourth-order finite-difference derivative on a uniform grid: centered
/// five-point stencil inside, one-sided five-point stencils on the two
/// nodes nearest each end. Needs at least 4 cells.
pub fn derivative<T: Scalar>(f: &[T], dx: T) -> Result<Vec<T>> {
    let len = f.len();
    if len < 5 {
        return Err(Error::InvalidGrid(format!("derivative needs at least 4 cells, got {}", len.saturating_sub(1))));
    }
    let n = len - 1;
    let c = |v: f64| lit::<T>(v);
    let scale = T::one() / (c(12.0) * dx);
    let mut d = vec![T::zero(); len];
    d[0] = (c(-25.0) * f[0] + c(48.0) * f[1] - c(36.0) * f[2] + c(16.0) * f[3] - c(3.0) * f[4]) * scale;
    d[1] = (c(-3.0) * f[0] - c(10.0) * f[1] + c(18.0) * f[2] - c(6.0) * f[3] + f[4]) * scale;
    for i in 2..n - 1 {
        d[i] = (f[i - 2] - c(8.0) * f[i - 1] + c(8.0) * f[i + 1] - f[i + 2]) * scale;
    }
    d[n - 1] = (c(3.0) * f[n] + c(10.0) * f[n - 1] - c(18.0) * f[n - 2] + c(6.0) * f[n - 3] - f[n - 4]) * scale;
    d[n] = (c(25.0) * f[n] - c(48.0) * f[n - 1] + c(36.0) * f[n - 2] - c(16.0) * f[n - 3] + c(3.0) * f[n - 4]) * scale;
    Ok(d)
}

/// Image of the generator together with the domain defect of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct AImage<T> {
    pub image: State<T>,
    /// `|w[0] - w[n] - gamma z|` of the input.
    pub defect: T,
}

/// `A(z, w)` without the domain check.
pub fn apply_a_unchecked<T: Scalar>(state: &State<T>, sys: &ClosedLoop<T>) -> Result<State<T>> {
    sys.check_state(state)?;
    let u = sys.feedback_raw(state.z, &state.w);
    let lambda = sys.params().lambda();
    let dw = derivative(&state.w, sys.grid().dx())?;
    Ok(State { z: sys.z_rate(state.z, u), w: dw.into_iter().map(|d| -lambda * d).collect(), t: state.t })
}

/// `A(z, w)`; the input must satisfy the discrete boundary relation.
pub fn apply_a<T: Scalar>(state: &State<T>, sys: &ClosedLoop<T>) -> Result<AImage<T>> {
    sys.check_state(state)?;
    let gamma = sys.params().gamma();
    state.require_compatible(gamma)?;
    Ok(AImage { image: apply_a_unchecked(state, sys)?, defect: state.compat_defect(gamma) })
}

/// `<A(s1) - A(s2), s1 - s2>_X`. Nonpositive up to discretization error for
/// states in the domain.
pub fn dissipativity_gap<T: Scalar>(s1: &State<T>, s2: &State<T>, sys: &ClosedLoop<T>) -> Result<T> {
    let a1 = apply_a(s1, sys)?.image;
    let a2 = apply_a(s2, sys)?.image;
    sys.inner_x(&a1.difference(&a2), &s1.difference(s2))
}

/// `(I - h A) zeta = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventProblem<'a, T> {
    pub rhs: &'a State<T>,
    pub h: T,
    pub system: &'a ClosedLoop<T>,
}

/// Weights of the exact exponential convolution of a piecewise-quadratic
/// interpolant over one cell.
///
/// With `eps = h lambda` and `r = dx / eps`, the cell contribution to
/// `eps^{-1} \int e^{-(x - s)/eps} w(s) ds` over `[x_i, x_{i+1}]` is
/// `sum_k c_k w_{i+k}` for the nodes of the local quadratic.
#[derive(Debug, Clone, Copy)]
struct CellWeights<T> {
    decay: T,
    forward: [T; 3],
    backward: [T; 3],
}

impl<T: Scalar> CellWeights<T> {
    fn new(r: T) -> Self {
        let [p0, p1, p2] = moments(r);
        let half = lit::<T>(0.5);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        Self {
            decay: (-r).exp(),
            // nodes at theta = 0, 1, 2
            forward: [half * (p2 - three * p1 + two * p0), two * p1 - p2, half * (p2 - p1)],
            // nodes at theta = -1, 0, 1
            backward: [half * (p2 - p1), p0 - p2, half * (p2 + p1)],
        }
    }
}

/// `P_k = r \int_0^1 e^{-r (1 - s)} s^k ds` for `k = 0, 1, 2`.
fn moments<T: Scalar>(r: T) -> [T; 3] {
    let mut j = [T::zero(); 3];
    if r < T::one() {
        // J_k = sum_m (-r)^m k! / (k + m + 1)!
        for (k, jk) in j.iter_mut().enumerate() {
            let mut term = T::one();
            for d in 1..=k + 1 {
                term = term / lit(d as f64);
            }
            term = term * lit(factorial(k));
            let mut acc = T::zero();
            for m in 0..60 {
                acc = acc + term;
                term = -term * r / lit((k + m + 2) as f64);
                if term.abs() < T::epsilon() * acc.abs() * lit(1e-3) {
                    break;
                }
            }
            *jk = acc;
        }
    } else {
        j[0] = -(-r).exp_m1() / r;
        for k in 1..3 {
            j[k] = (T::one() - lit::<T>(k as f64) * j[k - 1]) / r;
        }
    }
    [r * j[0], r * j[1], r * j[2]]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// `I_i = eps^{-1} \int_0^{x_i} e^{-(x_i - s)/eps} w(s) ds` with `w` the
/// piecewise-quadratic interpolant of the nodal values.
pub fn exponential_convolution<T: Scalar>(w: &[T], dx: T, eps: T) -> Result<Vec<T>> {
    if w.len() < 3 {
        return Err(Error::InvalidGrid("convolution needs at least 2 cells".into()));
    }
    let cw = CellWeights::new(dx / eps);
    let n = w.len() - 1;
    let mut out = vec![T::zero(); n + 1];
    for i in 0..n {
        let cell = if i + 2 <= n {
            cw.forward[0] * w[i] + cw.forward[1] * w[i + 1] + cw.forward[2] * w[i + 2]
        } else {
            cw.backward[0] * w[i - 1] + cw.backward[1] * w[i] + cw.backward[2] * w[i + 1]
        };
        out[i + 1] = cw.decay * out[i] + cell;
    }
    Ok(out)
}

/// Intermediate quantities of the resolvent construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventParts<T> {
    /// `w~ = g + b_coef e^{-x/eps} z~`: the `z~`-independent part.
    pub g: Vec<T>,
    /// `e^{-x_i / eps}` at the nodes.
    pub decay: Vec<T>,
    /// `gamma / (1 - e^{-1/eps})`.
    pub b_coef: T,
    /// `u = c z~ + mu <M, g>`; `c <= 0`.
    pub c: T,
    /// `mu <M, g>`.
    pub g_feedback: T,
}

impl<'a, T: Scalar> ResolventProblem<'a, T> {
    pub fn new(rhs: &'a State<T>, h: T, system: &'a ClosedLoop<T>) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("resolvent step must be positive, got {h}")));
        }
        system.check_state(rhs)?;
        Ok(Self { rhs, h, system })
    }

    /// Everything except the scalar root.
    pub fn parts(&self) -> Result<ResolventParts<T>> {
        let sys = self.system;
        let params = sys.params();
        let grid = sys.grid();
        let eps = self.h * params.lambda();
        let conv = exponential_convolution(&self.rhs.w, grid.dx(), eps)?;
        let n = grid.cells();
        let one_minus = -(-eps.recip()).exp_m1();
        let k = conv[n] / one_minus;
        let decay: Vec<T> = grid.nodes().map(|x| (-x / eps).exp()).collect();
        let g: Vec<T> = conv.iter().zip(&decay).map(|(i, e)| *i + k * *e).collect();
        let b_coef = params.gamma() / one_minus;
        let m = sys.gain().samples();
        let q = sys.quadrature();
        let mu = params.mu();
        let c = mu * (b_coef * q.inner_unchecked(&decay, m) - sys.gain_norm_sq());
        let g_feedback = mu * q.inner_unchecked(&g, m);
        Ok(ResolventParts { g, decay, b_coef, c, g_feedback })
    }
}

/// Absolute tolerance on the scalar root.
pub const RESOLVENT_Z_TOL: f64 = 1e-12;
const BRACKET_LIMIT: f64 = 1e150;

/// Solves `(I - h A)(z~, w~) = rhs`. The result satisfies the discrete
/// boundary relation up to rounding.
pub fn resolvent_solve<T: Scalar>(p: &ResolventProblem<'_, T>) -> Result<State<T>> {
    let parts = p.parts()?;
    let sys = p.system;
    let h = p.h;
    let a = sys.params().a();
    let sigma = sys.sigma();
    let z_rhs = p.rhs.z;
    // strictly increasing: slope >= 1 + h a because c <= 0 and sigma is nondecreasing
    let f = |zt: T| (T::one() + h * a) * zt - h * sigma.eval(parts.c * zt + parts.g_feedback) - z_rhs;
    let z = bisect(f)?;
    let w = parts.g.iter().zip(&parts.decay).map(|(g, e)| *g + parts.b_coef * *e * z).collect();
    let out = State { z, w, t: p.rhs.t + h };
    if !out.is_finite() {
        return Err(Error::NonFinite { time: to_f64(out.t) });
    }
    Ok(out)
}

fn bisect<T: Scalar, F: Fn(T) -> T>(f: F) -> Result<T> {
    let f0 = f(T::zero());
    if f0 == T::zero() {
        return Ok(T::zero());
    }
    let limit = lit::<T>(BRACKET_LIMIT);
    let mut span = T::one();
    let (mut lo, mut hi) = loop {
        if f0 < T::zero() && f(span) >= T::zero() {
            break (T::zero(), span);
        }
        if f0 > T::zero() && f(-span) <= T::zero() {
            break (-span, T::zero());
        }
        span = span + span;
        if span > limit {
            return Err(Error::BracketNotFound { bound: BRACKET_LIMIT });
        }
    };
    let tol = lit::<T>(RESOLVENT_Z_TOL);
    for _ in 0..2000 {
        let mid = lo + (hi - lo) * lit(0.5);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * lit(0.5))
}

/// `rhs - (I - h A) zeta`, the defining residual of the resolvent.
pub fn resolvent_residual<T: Scalar>(zeta: &State<T>, rhs: &State<T>, h: T, sys: &ClosedLoop<T>) -> Result<State<T>> {
    let az = apply_a_unchecked(zeta, sys)?;
    Ok(State {
        z: zeta.z - h * az.z - rhs.z,
        w: zeta.w.iter().zip(&az.w).zip(&rhs.w).map(|((v, d), r)| *v - h * *d - *r).collect(),
        t: rhs.t,
    })
}

/// One backward-Euler step `zeta_{k+1} = (I - h A)^{-1} zeta_k`.
pub fn implicit_step<T: Scalar>(state: &State<T>, h: T, sys: &ClosedLoop<T>) -> Result<State<T>> {
    resolvent_solve(&ResolventProblem::new(state, h, sys)?)
}

/// Backward-Euler integration from `(z0, w0)` to `t_end`. The sampled
/// initial profile is used as given (it need not lie in the domain).
pub fn solve<T: Scalar, F: Fn(T) -> T>(
    z0: T,
    w0: F,
    sys: &ClosedLoop<T>,
    h: T,
    t_end: T,
    snapshot_times: &[T],
) -> Result<Trajectory<T>> {
    let steps = step_count(t_end, h)?;
    let mut state = State::from_fn(z0, w0, sys.grid())?;
    let mut plan = SnapshotPlan::new(snapshot_times);
    let mut traj = Trajectory::new();
    for k in 0..=steps {
        state.t = crate::scalar::from_usize::<T>(k) * h;
        let u = sys.feedback_raw(state.z, &state.w);
        traj.push(TrajectoryRow::from_state(&state, u, sys)?)?;
        if plan.due(state.t, h) {
            traj.snapshots.push(snapshot_of(&state, sys));
        }
        if k < steps {
            state = implicit_step(&state, h, sys)?;
        }
    }
    Ok(traj)
}
