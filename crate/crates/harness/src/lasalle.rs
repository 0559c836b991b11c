//! Numerical counterpart of the LaSalle argument: tail suprema of the
//! closed loop, and the zero-inflow transport `w_t + lambda w_x = 0`,
//! `w(t, 0) = 0`, whose energy `E1` cannot stay constant unless `w0 = 0`.

use forwarding_core::spaces::{energy_e1, energy_e2};
use forwarding_core::{Grid64, Quadrature};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::{simulate, TailSups};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub e1: f64,
    pub e2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroInflowReport {
    pub lambda: f64,
    /// Rightmost grid point where `w0` is nonzero; `None` for `w0 = 0`.
    pub support_end: Option<f64>,
    pub e1_initial: f64,
    pub e2_initial: f64,
    /// `max |E1(t) - E1(0)| / E1(0)` while the support is still inside, i.e.
    /// `t <= (1 - support_end) / lambda`.
    pub e1_drift_before_exit: f64,
    /// `max E1(t)` for `t >= 1 / lambda`.
    pub e1_after_empty: f64,
    /// `max_t E2(t) / (e^{-lambda t} E2(0)) - 1`.
    pub e2_decay_excess: f64,
    /// `E1(t_end) = E1(0)` to `1e-9` relative.
    pub e1_preserved: bool,
    pub samples: Vec<EnergySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LasalleReport {
    pub tails: Vec<TailSups>,
    pub z_end: f64,
    pub zero_inflow: ZeroInflowReport,
}

/// Exact zero-inflow transport sampled on the grid: `w(t, x) = w0(x - lambda t)`
/// for `x >= lambda t`, zero behind the front.
pub fn zero_inflow<F: Fn(f64) -> f64>(w0: F, lambda: f64, n: usize, dt: f64, t_end: f64) -> Result<ZeroInflowReport> {
    let grid = Grid64::new(n).map_err(|e| HarnessError::solver("zero-inflow grid", e))?;
    let q = Quadrature::new(&grid);
    let nodes: Vec<f64> = grid.nodes().collect();
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut w = vec![0.0; nodes.len()];
    for k in 0..=steps {
        let t = k as f64 * dt;
        for (wi, x) in w.iter_mut().zip(&nodes) {
            let foot = x - lambda * t;
            *wi = if foot >= 0.0 { w0(foot) } else { 0.0 };
        }
        let e1 = energy_e1(&w, &q).map_err(|e| HarnessError::solver("zero-inflow", e))?;
        let e2 = energy_e2(&w, &q).map_err(|e| HarnessError::solver("zero-inflow", e))?;
        samples.push(EnergySample { t, e1, e2 });
    }
    let support_end = nodes.iter().rev().find(|x| w0(**x) != 0.0).copied();
    let (e1_0, e2_0) = (samples[0].e1, samples[0].e2);
    let exit = support_end.map(|s| (1.0 - s) / lambda).unwrap_or(f64::INFINITY);
    let rel = |v: f64| if e1_0 > 0.0 { v / e1_0 } else { v };
    let e1_drift_before_exit =
        samples.iter().filter(|s| s.t <= exit).map(|s| rel((s.e1 - e1_0).abs())).fold(0.0, f64::max);
    let e1_after_empty = samples.iter().filter(|s| s.t >= 1.0 / lambda).map(|s| s.e1).fold(0.0, f64::max);
    let e2_decay_excess = if e2_0 > 0.0 {
        samples.iter().map(|s| s.e2 / ((-lambda * s.t).exp() * e2_0) - 1.0).fold(f64::MIN, f64::max)
    } else {
        0.0
    };
    let e1_end = samples.last().map(|s| s.e1).unwrap_or(0.0);
    Ok(ZeroInflowReport {
        lambda,
        support_end,
        e1_initial: e1_0,
        e2_initial: e2_0,
        e1_drift_before_exit,
        e1_after_empty,
        e2_decay_excess,
        e1_preserved: (e1_end - e1_0).abs() <= 1e-9 * e1_0.max(f64::MIN_POSITIVE),
        samples,
    })
}

/// Closed-loop tail suprema of the configured run, and the zero-inflow
/// transport of the same `w0` over `[0, 2 / lambda]`.
pub fn lasalle_check(cfg: &ExperimentConfig) -> Result<LasalleReport> {
    let out = simulate(cfg)?;
    let params = cfg.plant()?;
    let lambda = params.lambda();
    let zero_inflow = zero_inflow(cfg.initial.w0.function(&params), lambda, cfg.solver.n, cfg.solver.dt, 2.0 / lambda)?;
    Ok(LasalleReport {
        tails: out.summary.tails,
        z_end: out.trajectory.last().map(|r| r.z).unwrap_or(0.0),
        zero_inflow,
    })
}
