//! Time series produced by every solver, with the closed-loop diagnostics.

use crate::closed_loop::ClosedLoop;
use crate::error::{Error, Result};
use crate::model::State;
use crate::scalar::{to_f64, Scalar};
use crate::spaces;

/// One sample of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow<T> {
    pub t: T,
    pub z: T,
    /// Feedback value `mu <w - M z, M>`.
    pub u: T,
    /// Lyapunov function `||(z, w)||_X^2`.
    pub v: T,
    pub e1: T,
    pub e2: T,
    pub z_sq: T,
    pub w_l2_sq: T,
}

impl<T: Scalar> TrajectoryRow<T> {
    /// Diagnostics of `state` with the feedback value already known.
    pub fn from_state(state: &State<T>, u: T, sys: &ClosedLoop<T>) -> Result<Self> {
        let q = sys.quadrature();
        let e1 = spaces::energy_e1(&state.w, q)?;
        Ok(Self {
            t: state.t,
            z: state.z,
            u,
            v: sys.norm_x_sq(state)?,
            e1,
            e2: spaces::energy_e2(&state.w, q)?,
            z_sq: state.z * state.z,
            w_l2_sq: e1,
        })
    }

    pub fn values(&self) -> [T; 8] {
        [self.t, self.z, self.u, self.v, self.e1, self.e2, self.z_sq, self.w_l2_sq]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Profile of `w` recorded at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub x: Vec<T>,
    pub w: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<T> {
    pub rows: Vec<TrajectoryRow<T>>,
    pub snapshots: Vec<Snapshot<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new() -> Self {
        Self { rows: Vec::new(), snapshots: Vec::new() }
    }

    /// Appends a row, enforcing strictly increasing, finite samples.
    pub fn push(&mut self, row: TrajectoryRow<T>) -> Result<()> {
        if !row.is_finite() {
            return Err(Error::NonFinite { time: to_f64(row.t) });
        }
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::InvalidConfig(format!(
                    "trajectory times must increase: {} after {}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&TrajectoryRow<T>> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&TrajectoryRow<T>> {
        self.rows.last()
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    /// Largest one-step increase `V(t_{k+1}) - V(t_k)` (negative when strictly decreasing).
    pub fn max_v_increment(&self) -> Option<T> {
        self.rows.windows(2).map(|p| p[1].v - p[0].v).reduce(T::max)
    }

    pub fn min_v_increment(&self) -> Option<T> {
        self.rows.windows(2).map(|p| p[1].v - p[0].v).reduce(T::min)
    }

    /// Linear interpolation of `z` at time `t` (clamped to the sampled range).
    pub fn z_at(&self, t: T) -> Option<T> {
        self.interp(t, |r| r.z)
    }

    /// Linear interpolation of any row field at time `t`.
    pub fn interp<F: Fn(&TrajectoryRow<T>) -> T>(&self, t: T, field: F) -> Option<T> {
        let rows = &self.rows;
        let first = rows.first()?;
        let last = rows.last()?;
        if t <= first.t {
            return Some(field(first));
        }
        if t >= last.t {
            return Some(field(last));
        }
        let k = rows.partition_point(|r| r.t <= t);
        let (r0, r1) = (&rows[k - 1], &rows[k]);
        let s = (t - r0.t) / (r1.t - r0.t);
        Some(field(r0) + s * (field(r1) - field(r0)))
    }

    /// Earliest sample time at which `field` first drops below `threshold`.
    pub fn first_below<F: Fn(&TrajectoryRow<T>) -> T>(&self, threshold: T, field: F) -> Option<T> {
        self.rows.iter().find(|r| field(r) < threshold).map(|r| r.t)
    }

    /// Earliest sample time after which `field` stays below `threshold` for
    /// the rest of the run.
    pub fn settles_below<F: Fn(&TrajectoryRow<T>) -> T>(&self, threshold: T, field: F) -> Option<T> {
        let last_above = self.rows.iter().rposition(|r| field(r) >= threshold);
        match last_above {
            None => self.rows.first().map(|r| r.t),
            Some(k) if k + 1 < self.rows.len() => Some(self.rows[k + 1].t),
            Some(_) => None,
        }
    }

    /// `sup |field|` over samples with `t >= from`.
    pub fn tail_sup<F: Fn(&TrajectoryRow<T>) -> T>(&self, from: T, field: F) -> Option<T> {
        self.rows.iter().filter(|r| r.t >= from).map(|r| field(r).abs()).reduce(T::max)
    }
}

/// Number of steps of size `dt` that reach `t_end` (last step may overshoot
/// by rounding only).
pub(crate) fn step_count<T: Scalar>(t_end: T, dt: T) -> Result<usize> {
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidConfig(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let ratio = to_f64(t_end) / to_f64(dt);
    Ok((ratio - 1e-9).ceil().max(1.0) as usize)
}

/// Tracks which requested snapshot times have been served.
pub(crate) struct SnapshotPlan<T> {
    times: Vec<T>,
    next: usize,
}

impl<T: Scalar> SnapshotPlan<T> {
    pub fn new(times: &[T]) -> Self {
        let mut times = times.to_vec();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Self { times, next: 0 }
    }

    /// True when a snapshot is due at step time `t` with step `dt`.
    pub fn due(&mut self, t: T, dt: T) -> bool {
        let half = dt / (T::one() + T::one());
        let mut due = false;
        while self.next < self.times.len() && t >= self.times[self.next] - half {
            self.next += 1;
            due = true;
        }
        due
    }
}

pub(crate) fn snapshot_of<T: Scalar>(state: &State<T>, sys: &ClosedLoop<T>) -> Snapshot<T> {
    Snapshot { t: state.t, x: sys.grid().nodes().collect(), w: state.w.clone() }
}
