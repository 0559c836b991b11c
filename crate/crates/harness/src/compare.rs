//! Pointwise comparison of two runs of the same experiment, with an
//! empirical convergence order when the second run refines the first.

use forwarding_core::Trajectory64;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::simulate;

/// Number of rows of the deviation table.
const TABLE_ROWS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationRow {
    pub t: f64,
    pub z_a: f64,
    pub z_b: f64,
    pub dz: f64,
    pub du: f64,
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub t_end: f64,
    pub table: Vec<DeviationRow>,
    pub max_dz: f64,
    pub max_du: f64,
    pub max_dv: f64,
    /// `a -> b` refinement factor when both runs use the same solver.
    pub refinement: Option<f64>,
    /// `log(e_ab / e_bc) / log(r)` from a third run refined once more.
    pub order: Option<f64>,
}

fn same_experiment(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    a.params == b.params && a.sigma == b.sigma && a.initial == b.initial
}

/// Refinement factor `r > 1` such that `b` is `a` with every resolution
/// parameter improved by `r` (or left unchanged).
fn refinement(a: &ExperimentConfig, b: &ExperimentConfig) -> Option<f64> {
    if a.solver.kind != b.solver.kind || a.solver.interp != b.solver.interp {
        return None;
    }
    let rn = b.solver.n as f64 / a.solver.n as f64;
    let rt = a.solver.dt / b.solver.dt;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
    let r = match (close(rn, 1.0), close(rt, 1.0)) {
        (true, true) => return None,
        (true, false) => rt,
        (false, true) => rn,
        (false, false) if close(rn, rt) => rt,
        _ => return None,
    };
    (r > 1.0).then_some(r)
}

fn refined(b: &ExperimentConfig, a: &ExperimentConfig) -> ExperimentConfig {
    let n = (b.solver.n as f64 * b.solver.n as f64 / a.solver.n as f64).round() as usize;
    let dt = b.solver.dt * b.solver.dt / a.solver.dt;
    let mut c = b.with_solver(b.solver.kind, n, dt);
    c.name = format!("{}-refined", b.name);
    c
}

/// `max |z_a - z_b|` over the time samples of `a`.
fn max_z_deviation(a: &Trajectory64, b: &Trajectory64, t_end: f64) -> f64 {
    a.rows
        .iter()
        .filter(|r| r.t <= t_end)
        .filter_map(|r| b.z_at(r.t).map(|z| (r.z - z).abs()))
        .fold(0.0, f64::max)
}

pub fn compare_trajectories(a: &Trajectory64, b: &Trajectory64, t_end: f64) -> CompareReport {
    let (mut max_dz, mut max_du, mut max_dv) = (0.0f64, 0.0f64, 0.0f64);
    for r in a.rows.iter().filter(|r| r.t <= t_end) {
        if let (Some(z), Some(u), Some(v)) = (b.z_at(r.t), b.interp(r.t, |q| q.u), b.interp(r.t, |q| q.v)) {
            max_dz = max_dz.max((r.z - z).abs());
            max_du = max_du.max((r.u - u).abs());
            max_dv = max_dv.max((r.v - v).abs());
        }
    }
    let table = (0..TABLE_ROWS)
        .filter_map(|k| {
            let t = t_end * k as f64 / (TABLE_ROWS - 1) as f64;
            let (z_a, z_b) = (a.z_at(t)?, b.z_at(t)?);
            Some(DeviationRow {
                t,
                z_a,
                z_b,
                dz: (z_a - z_b).abs(),
                du: (a.interp(t, |r| r.u)? - b.interp(t, |r| r.u)?).abs(),
                dv: (a.interp(t, |r| r.v)? - b.interp(t, |r| r.v)?).abs(),
            })
        })
        .collect();
    CompareReport { t_end, table, max_dz, max_du, max_dv, refinement: None, order: None }
}

pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<CompareReport> {
    if !same_experiment(a, b) {
        return Err(HarnessError::Config(
            "configs are not comparable: params, sigma and initial data must agree".into(),
        ));
    }
    let t_end = a.run.t_end.min(b.run.t_end);
    let ta = simulate(a)?.trajectory;
    let tb = simulate(b)?.trajectory;
    let mut report = compare_trajectories(&ta, &tb, t_end);
    if let Some(r) = refinement(a, b) {
        let tc = simulate(&refined(b, a))?.trajectory;
        let e_ab = report.max_dz;
        let e_bc = max_z_deviation(&tb, &tc, t_end);
        report.refinement = Some(r);
        report.order = (e_ab > 0.0 && e_bc > 0.0).then(|| (e_ab / e_bc).ln() / r.ln());
    }
    Ok(report)
}
