//! First-order upwind semidiscretization of the closed loop, integrated with
//! classical RK4. Independent of the characteristics solver; used to
//! cross-validate it.
//!
//! Node 0 is slaved to the boundary relation `w[0] = w[n] + gamma z`; it is
//! never differenced, only re-imposed.

use crate::closed_loop::ClosedLoop;
use crate::error::{Error, Result};
use crate::model::State;
use crate::scalar::{lit, to_f64, Scalar};
use crate::trajectory::{snapshot_of, step_count, SnapshotPlan, Trajectory, TrajectoryRow};

/// Rejects `lambda dt > dx`.
pub fn check_cfl<T: Scalar>(sys: &ClosedLoop<T>, dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let courant = sys.params().lambda() * dt;
    let dx = sys.grid().dx();
    if courant > dx * (T::one() + lit(1e-12)) {
        return Err(Error::Cfl { courant: to_f64(courant), dx: to_f64(dx) });
    }
    Ok(())
}

/// Right-hand side `(z', w')` of the semidiscrete system.
pub fn semidiscrete_rhs<T: Scalar>(state: &State<T>, sys: &ClosedLoop<T>) -> Result<(T, Vec<T>)> {
    sys.check_state(state)?;
    let mut dw = vec![T::zero(); state.w.len()];
    let dz = rhs_into(state.z, &state.w, sys, &mut dw);
    Ok((dz, dw))
}

fn rhs_into<T: Scalar>(z: T, w: &[T], sys: &ClosedLoop<T>, dw: &mut [T]) -> T {
    let n = w.len() - 1;
    let params = sys.params();
    let c = params.lambda() / sys.grid().dx();
    let u = sys.feedback_raw(z, w);
    let dz = sys.z_rate(z, u);
    for i in 1..=n {
        dw[i] = -c * (w[i] - w[i - 1]);
    }
    // time derivative of the boundary relation
    dw[0] = dw[n] + params.gamma() * dz;
    dz
}

fn impose_boundary<T: Scalar>(z: T, w: &mut [T], gamma: T) {
    let n = w.len() - 1;
    w[0] = w[n] + gamma * z;
}

/// Reusable stage buffers for RK4.
struct Rk4Work<T> {
    k: [Vec<T>; 4],
    tmp: Vec<T>,
}

impl<T: Scalar> Rk4Work<T> {
    fn new(len: usize) -> Self {
        Self {
            k: [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]],
            tmp: vec![T::zero(); len],
        }
    }

    fn step(&mut self, state: &mut State<T>, sys: &ClosedLoop<T>, dt: T) {
        let half = dt * lit(0.5);
        let Rk4Work { k, tmp } = self;
        let [k1, k2, k3, k4] = k;
        let kz1 = rhs_into(state.z, &state.w, sys, k1);
        axpy(tmp, &state.w, half, k1);
        let kz2 = rhs_into(state.z + half * kz1, tmp, sys, k2);
        axpy(tmp, &state.w, half, k2);
        let kz3 = rhs_into(state.z + half * kz2, tmp, sys, k3);
        axpy(tmp, &state.w, dt, k3);
        let kz4 = rhs_into(state.z + dt * kz3, tmp, sys, k4);
        let sixth = dt / lit(6.0);
        let two = lit::<T>(2.0);
        for i in 0..state.w.len() {
            state.w[i] = state.w[i] + sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        state.z = state.z + sixth * (kz1 + two * (kz2 + kz3) + kz4);
        state.t = state.t + dt;
        impose_boundary(state.z, &mut state.w, sys.params().gamma());
    }
}

fn axpy<T: Scalar>(out: &mut [T], x: &[T], a: T, y: &[T]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = *xi + a * *yi;
    }
}

/// One RK4 step of the coupled semidiscrete system; the boundary relation is
/// re-imposed on the result.
pub fn step_rk4<T: Scalar>(state: &State<T>, sys: &ClosedLoop<T>, dt: T) -> Result<State<T>> {
    check_cfl(sys, dt)?;
    sys.check_state(state)?;
    let mut next = state.clone();
    Rk4Work::new(state.w.len()).step(&mut next, sys, dt);
    if !next.is_finite() {
        return Err(Error::NonFinite { time: to_f64(next.t) });
    }
    Ok(next)
}

/// Integrates from `(z0, w0)` to `t_end`. Node 0 of the sampled initial
/// profile is replaced by `w0(1) + gamma z0`.
pub fn solve<T: Scalar, F: Fn(T) -> T>(
    z0: T,
    w0: F,
    sys: &ClosedLoop<T>,
    dt: T,
    t_end: T,
    snapshot_times: &[T],
) -> Result<Trajectory<T>> {
    check_cfl(sys, dt)?;
    let steps = step_count(t_end, dt)?;
    let mut state = State::from_fn(z0, w0, sys.grid())?;
    impose_boundary(state.z, &mut state.w, sys.params().gamma());
    let mut work = Rk4Work::new(state.w.len());
    let mut plan = SnapshotPlan::new(snapshot_times);
    let mut traj = Trajectory::new();
    for k in 0..=steps {
        // keep step times exact multiples of dt
        state.t = crate::scalar::from_usize::<T>(k) * dt;
        if !state.is_finite() {
            return Err(Error::NonFinite { time: to_f64(state.t) });
        }
        let u = sys.feedback_raw(state.z, &state.w);
        traj.push(TrajectoryRow::from_state(&state, u, sys)?)?;
        if plan.due(state.t, dt) {
            traj.snapshots.push(snapshot_of(&state, sys));
        }
        if k < steps {
            work.step(&mut state, sys, dt);
        }
    }
    Ok(traj)
}
