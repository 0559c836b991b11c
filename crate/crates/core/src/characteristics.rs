//! Reference solver built on the exact transport solution.
//!
//! Along characteristics `w(t, x) = w0(x - lambda t)` while `x >= lambda t`,
//! and `w(t, x) = b(t - x / lambda)` otherwise, where `b(t) = w(t, 0)` is the
//! inflow trace. The trace obeys `b(t) = w(t, 1) + gamma z(t)`, so only `z`
//! and `b` are discretized: `z` by classical RK4 and `b` as a uniformly
//! sampled history queried by interpolation.

use crate::closed_loop::ClosedLoop;
use crate::error::{Error, Result};
use crate::model::{ConeBounded, Grid, Params, State};
use crate::scalar::{from_usize, lit, to_f64, Scalar};
use crate::trajectory::{snapshot_of, step_count, SnapshotPlan, Trajectory, TrajectoryRow};

/// Interpolation used for history queries between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interp {
    #[default]
    Linear,
    /// Four-point Lagrange on the uniform part, quadratic on the newest step.
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharSolverConfig<T> {
    pub dt: T,
    /// Cells of the grid on which `w` is rendered and `u` is integrated.
    pub n_render: usize,
    pub interp: Interp,
}

impl<T: Scalar> CharSolverConfig<T> {
    pub fn new(dt: T, n_render: usize) -> Self {
        Self { dt, n_render, interp: Interp::Linear }
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn validate(&self, params: &Params<T>) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        // the delayed trace b(t - 1/lambda) must already be in the history at every stage
        if params.lambda() * self.dt > T::one() {
            return Err(Error::InvalidConfig(format!(
                "lambda*dt = {} exceeds 1: the delay window is shorter than one step",
                params.lambda() * self.dt
            )));
        }
        if self.n_render < 2 {
            return Err(Error::InvalidConfig("n_render must be at least 2".into()));
        }
        Ok(())
    }
}

/// Samples `b_k = w(k dt, 0)` over a sliding window that always covers the
/// last delay interval `1 / lambda`.
#[derive(Debug, Clone)]
pub struct BoundaryHistory<T> {
    dt: T,
    // global step index of values[head]
    first: usize,
    head: usize,
    values: Vec<T>,
    keep: usize,
}

impl<T: Scalar> BoundaryHistory<T> {
    /// Empty history retaining at least `window` time units.
    pub fn new(dt: T, window: T) -> Self {
        let steps = (to_f64(window) / to_f64(dt)).ceil() as usize;
        let keep = steps + 6;
        Self { dt, first: 0, head: 0, values: Vec::with_capacity(2 * keep + 2), keep }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len() - self.head
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn window(&self) -> &[T] {
        &self.values[self.head..]
    }

    /// Appends the sample for the next step time; old samples are dropped
    /// once they leave the retention window.
    pub fn push(&mut self, value: T) {
        self.values.push(value);
        if self.len() > self.keep {
            self.head += 1;
            self.first += 1;
        }
        if self.head > self.keep {
            self.values.drain(..self.head);
            self.head = 0;
        }
    }

    fn time_of(&self, k: usize) -> T {
        from_usize::<T>(k) * self.dt
    }

    pub fn first_time(&self) -> Option<T> {
        (!self.is_empty()).then(|| self.time_of(self.first))
    }

    pub fn last_time(&self) -> Option<T> {
        (!self.is_empty()).then(|| self.time_of(self.first + self.len() - 1))
    }

    pub fn last_value(&self) -> Option<T> {
        self.window().last().copied()
    }

    fn gap(&self, time: T) -> Error {
        Error::HistoryGap {
            time: to_f64(time),
            first: self.first_time().map(to_f64).unwrap_or(f64::NAN),
            last: self.last_time().map(to_f64).unwrap_or(f64::NAN),
        }
    }

    /// Trace value at `time` inside the stored window; never extrapolates.
    pub fn value(&self, time: T, interp: Interp) -> Result<T> {
        let values = self.window();
        let len = values.len();
        if len == 0 {
            return Err(self.gap(time));
        }
        let slack = lit::<T>(1e-9);
        // position in units of dt relative to the oldest sample
        let pos = time / self.dt - from_usize(self.first);
        let top = from_usize::<T>(len - 1);
        if pos < -slack || pos > top + slack {
            return Err(self.gap(time));
        }
        let pos = pos.max(T::zero()).min(top);
        if len == 1 {
            return Ok(values[0]);
        }
        let j = pos.floor().to_usize().unwrap_or(0).min(len - 2);
        let s = pos - from_usize(j);
        match interp {
            Interp::Cubic if len >= 4 => {
                let start = j.saturating_sub(1).min(len - 4);
                let s = pos - from_usize(start);
                Ok(lagrange4([values[start], values[start + 1], values[start + 2], values[start + 3]], s))
            }
            _ => Ok(values[j] + s * (values[j + 1] - values[j])),
        }
    }
}

/// Lagrange interpolation on nodes 0, 1, 2, 3.
#[inline]
fn lagrange4<T: Scalar>(f: [T; 4], s: T) -> T {
    let one = T::one();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let six = lit::<T>(6.0);
    let (s0, s1, s2, s3) = (s, s - one, s - two, s - three);
    -f[0] * s1 * s2 * s3 / six + f[1] * s0 * s2 * s3 / two - f[2] * s0 * s1 * s3 / two
        + f[3] * s0 * s1 * s2 / six
}

/// History plus an optional provisional trace sample ahead of the stored
/// window, used inside RK stages.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a, T> {
    hist: &'a BoundaryHistory<T>,
    provisional: Option<(T, T)>,
    interp: Interp,
}

impl<'a, T: Scalar> HistoryView<'a, T> {
    pub fn new(hist: &'a BoundaryHistory<T>, interp: Interp) -> Self {
        Self { hist, provisional: None, interp }
    }

    /// Adds the sample `(time, value)` with `time` past the stored window.
    pub fn with_provisional(mut self, time: T, value: T) -> Self {
        self.provisional = Some((time, value));
        self
    }

    pub fn value(&self, time: T) -> Result<T> {
        if let (Some((tp, bp)), Some(t_last), Some(b_last)) =
            (self.provisional, self.hist.last_time(), self.hist.last_value())
        {
            if time > t_last && tp > t_last {
                if time > tp + lit::<T>(1e-9) * self.hist.dt() {
                    return Err(self.hist.gap(time));
                }
                let h = tp - t_last;
                let s = ((time - t_last) / h).min(T::one());
                let len = self.hist.len();
                if self.interp == Interp::Cubic && len >= 2 {
                    // quadratic through (t_last - dt, t_last, tp)
                    let dt = self.hist.dt();
                    let b_prev = self.hist.window()[len - 2];
                    let x = time - t_last;
                    let l_prev = x * (x - h) / (dt * (dt + h));
                    let l_last = (x + dt) * (x - h) / (-dt * h);
                    let l_p = (x + dt) * x / ((h + dt) * h);
                    return Ok(b_prev * l_prev + b_last * l_last + bp * l_p);
                }
                return Ok(b_last + s * (bp - b_last));
            }
        }
        self.hist.value(time, self.interp)
    }
}

/// `w(t, x)` from the initial profile and the inflow trace.
pub fn reconstruct_w<T: Scalar, F: Fn(T) -> T>(
    t: T,
    x: T,
    w0: &F,
    hist: &HistoryView<'_, T>,
    params: &Params<T>,
) -> Result<T> {
    let foot = x - params.lambda() * t;
    if foot >= T::zero() {
        Ok(w0(foot))
    } else {
        hist.value(t - x / params.lambda())
    }
}

/// Characteristics solver run: owns the trace history and the ODE state.
pub struct CharacteristicsSolver<T, F> {
    sys: ClosedLoop<T>,
    config: CharSolverConfig<T>,
    w0: F,
    hist: BoundaryHistory<T>,
    z: T,
    step: usize,
    nodes: Vec<T>,
    // x_i / lambda
    delays: Vec<T>,
    // trapezoid weight times M(x_i)
    weighted_gain: Vec<T>,
}

impl<T: Scalar, F: Fn(T) -> T> CharacteristicsSolver<T, F> {
    pub fn new(
        params: Params<T>,
        sigma: ConeBounded<T>,
        config: CharSolverConfig<T>,
        z0: T,
        w0: F,
    ) -> Result<Self> {
        config.validate(&params)?;
        if !z0.is_finite() {
            return Err(Error::NonFiniteState);
        }
        let sys = ClosedLoop::new(params, sigma, Grid::new(config.n_render)?);
        let mut hist = BoundaryHistory::new(config.dt, T::one() / params.lambda());
        // w(0+, 0) = w0(1) + gamma z0
        hist.push(w0(T::one()) + params.gamma() * z0);
        let nodes: Vec<T> = sys.grid().nodes().collect();
        let delays = nodes.iter().map(|x| *x / params.lambda()).collect();
        let weighted_gain =
            sys.quadrature().weights().iter().zip(sys.gain().samples()).map(|(q, m)| *q * *m).collect();
        Ok(Self { sys, config, w0, hist, z: z0, step: 0, nodes, delays, weighted_gain })
    }

    pub fn system(&self) -> &ClosedLoop<T> {
        &self.sys
    }

    pub fn history(&self) -> &BoundaryHistory<T> {
        &self.hist
    }

    pub fn time(&self) -> T {
        from_usize::<T>(self.step) * self.config.dt
    }

    pub fn z(&self) -> T {
        self.z
    }

    fn view(&self) -> HistoryView<'_, T> {
        HistoryView::new(&self.hist, self.config.interp)
    }

    /// `w(t, x)` for `t` up to the current time.
    pub fn w_at(&self, t: T, x: T) -> Result<T> {
        reconstruct_w(t, x, &self.w0, &self.view(), self.sys.params())
    }

    /// Current state rendered on the grid.
    pub fn state(&self) -> Result<State<T>> {
        let t = self.time();
        let view = self.view();
        let w = self
            .sys
            .grid()
            .nodes()
            .map(|x| reconstruct_w(t, x, &self.w0, &view, self.sys.params()))
            .collect::<Result<Vec<_>>>()?;
        Ok(State { z: self.z, w, t })
    }

    /// Inflow trace `w(t, 1) + gamma z` at a time not yet in the history.
    fn trace_ahead(&self, t: T, z: T) -> Result<T> {
        Ok(self.w_at(t, T::one())? + self.sys.params().gamma() * z)
    }

    /// `u` at stage time `t` with stage value `z`.
    fn stage_feedback(&self, t: T, z: T, view: &HistoryView<'_, T>) -> Result<T> {
        let params = self.sys.params();
        let lambda = params.lambda();
        let mut acc = T::zero();
        for ((x, qm), delay) in self.nodes.iter().zip(&self.weighted_gain).zip(&self.delays) {
            let foot = *x - lambda * t;
            let w = if foot >= T::zero() { (self.w0)(foot) } else { view.value(t - *delay)? };
            acc = acc + *qm * w;
        }
        Ok(params.mu() * (acc - z * self.sys.gain_norm_sq()))
    }

    fn rate_at(&self, t: T, z: T) -> Result<T> {
        let b = self.trace_ahead(t, z)?;
        let view = self.view().with_provisional(t, b);
        let u = self.stage_feedback(t, z, &view)?;
        Ok(self.sys.z_rate(z, u))
    }

    /// Advances one RK4 step of size `dt` given the feedback at the current time.
    fn advance(&mut self, u_now: T) -> Result<()> {
        let dt = self.config.dt;
        let half = dt * lit(0.5);
        let t = self.time();
        let z = self.z;
        let k1 = self.sys.z_rate(z, u_now);
        let k2 = self.rate_at(t + half, z + half * k1)?;
        let k3 = self.rate_at(t + half, z + half * k2)?;
        let t_next = from_usize::<T>(self.step + 1) * dt;
        let k4 = self.rate_at(t_next, z + dt * k3)?;
        let z_next = z + dt / lit(6.0) * (k1 + lit::<T>(2.0) * (k2 + k3) + k4);
        if !z_next.is_finite() {
            return Err(Error::NonFinite { time: to_f64(t_next) });
        }
        let b_next = self.trace_ahead(t_next, z_next)?;
        if !b_next.is_finite() {
            return Err(Error::NonFinite { time: to_f64(t_next) });
        }
        self.hist.push(b_next);
        self.z = z_next;
        self.step += 1;
        Ok(())
    }

    /// One RK4 step; returns the state at the new time.
    pub fn step(&mut self) -> Result<State<T>> {
        let now = self.state()?;
        let u = self.sys.feedback_raw(now.z, &now.w);
        self.advance(u)?;
        self.state()
    }

    /// Runs to `t_end`, recording one row per step.
    pub fn run(&mut self, t_end: T, snapshot_times: &[T]) -> Result<Trajectory<T>> {
        let steps = step_count(t_end, self.config.dt)?;
        let mut traj = Trajectory::new();
        let mut plan = SnapshotPlan::new(snapshot_times);
        for k in 0..=steps {
            let state = self.state()?;
            let u = self.sys.feedback_raw(state.z, &state.w);
            traj.push(TrajectoryRow::from_state(&state, u, &self.sys)?)?;
            if plan.due(state.t, self.config.dt) {
                traj.snapshots.push(snapshot_of(&state, &self.sys));
            }
            if k < steps {
                self.advance(u)?;
            }
        }
        Ok(traj)
    }
}

/// Solves the closed loop on `[0, t_end]` with the characteristics method.
pub fn solve<T: Scalar, F: Fn(T) -> T>(
    z0: T,
    w0: F,
    params: &Params<T>,
    sigma: &ConeBounded<T>,
    config: &CharSolverConfig<T>,
    t_end: T,
) -> Result<Trajectory<T>> {
    solve_with_snapshots(z0, w0, params, sigma, config, t_end, &[])
}

pub fn solve_with_snapshots<T: Scalar, F: Fn(T) -> T>(
    z0: T,
    w0: F,
    params: &Params<T>,
    sigma: &ConeBounded<T>,
    config: &CharSolverConfig<T>,
    t_end: T,
    snapshot_times: &[T],
) -> Result<Trajectory<T>> {
    CharacteristicsSolver::new(*params, *sigma, *config, z0, w0)?.run(t_end, snapshot_times)
}
