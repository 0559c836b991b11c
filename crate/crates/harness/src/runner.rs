//! Runs one experiment: dispatch to a solver, summarize, write CSV.

use std::path::{Path, PathBuf};

use forwarding_core::{characteristics, operator, upwind, ClosedLoop64, Trajectory64, TrajectoryRow64};
use serde::Serialize;

use crate::config::{ExperimentConfig, SolverKind};
use crate::csv_io;
use crate::error::{HarnessError, Result};

/// Threshold of the "first |z| below" summary entry.
pub const Z_ABS_THRESHOLD: f64 = 1e-3;
/// Threshold of the settling times of `z^2` and `||w||^2`.
pub const SQUARE_THRESHOLD: f64 = 1e-4;

/// Tail suprema over `[from, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSups {
    pub from: f64,
    pub sup_abs_z: f64,
    pub sup_abs_u: f64,
    /// `sup |<w, M>|`, recovered as `u / mu + z ||M||^2`.
    pub sup_abs_w_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub solver: SolverKind,
    pub steps: usize,
    pub v0: f64,
    pub v_end: f64,
    pub v_ratio: f64,
    pub max_dv: f64,
    pub min_dv: f64,
    /// Per-step increase of `V` stays below `1e-6 V(0)`.
    pub v_monotone: bool,
    pub z_sq_ratio: f64,
    pub w_sq_ratio: f64,
    pub first_abs_z_below: Option<f64>,
    /// Earliest time after which `z^2` stays below [`SQUARE_THRESHOLD`].
    pub z_sq_settles: Option<f64>,
    pub w_sq_settles: Option<f64>,
    pub tails: Vec<TailSups>,
}

pub struct RunOutput {
    pub trajectory: Trajectory64,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// `<w, M>` at a row.
pub fn w_gain_pairing(row: &TrajectoryRow64, sys: &ClosedLoop64) -> f64 {
    row.u / sys.params().mu() + row.z * sys.gain_norm_sq()
}

pub fn tail_sups(traj: &Trajectory64, sys: &ClosedLoop64, from: f64) -> Option<TailSups> {
    Some(TailSups {
        from,
        sup_abs_z: traj.tail_sup(from, |r| r.z.abs())?,
        sup_abs_u: traj.tail_sup(from, |r| r.u.abs())?,
        sup_abs_w_gain: traj.tail_sup(from, |r| w_gain_pairing(r, sys).abs())?,
    })
}

pub fn summarize(cfg: &ExperimentConfig, traj: &Trajectory64, sys: &ClosedLoop64) -> Result<Summary> {
    let (first, last) = match (traj.first(), traj.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(HarnessError::Config("empty trajectory".into())),
    };
    let max_dv = traj.max_v_increment().unwrap_or(0.0);
    Ok(Summary {
        name: cfg.name.clone(),
        solver: cfg.solver.kind,
        steps: traj.len() - 1,
        v0: first.v,
        v_end: last.v,
        v_ratio: ratio(last.v, first.v),
        max_dv,
        min_dv: traj.min_v_increment().unwrap_or(0.0),
        v_monotone: max_dv <= 1e-6 * first.v,
        z_sq_ratio: ratio(last.z_sq, first.z_sq),
        w_sq_ratio: ratio(last.w_l2_sq, first.w_l2_sq),
        first_abs_z_below: traj.first_below(Z_ABS_THRESHOLD, |r| r.z.abs()),
        z_sq_settles: traj.settles_below(SQUARE_THRESHOLD, |r| r.z_sq),
        w_sq_settles: traj.settles_below(SQUARE_THRESHOLD, |r| r.w_l2_sq),
        tails: cfg.run.barbalat_from.iter().filter(|t| **t <= last.t).filter_map(|t| tail_sups(traj, sys, *t)).collect(),
    })
}

/// Runs the configured solver without touching the filesystem.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let params = cfg.plant()?;
    let sigma = cfg.cone_bounded()?;
    let sys = cfg.system()?;
    let w0 = cfg.initial.w0.function(&params);
    let z0 = cfg.initial.z0;
    let (t_end, dt, snaps) = (cfg.run.t_end, cfg.solver.dt, &cfg.run.snapshots);
    let context = format!("{} ({:?} solver)", cfg.name, cfg.solver.kind);
    let trajectory = match cfg.solver.kind {
        SolverKind::Characteristics => {
            characteristics::solve_with_snapshots(z0, w0, &params, &sigma, &cfg.char_config(), t_end, snaps)
        }
        SolverKind::Upwind => upwind::solve(z0, w0, &sys, dt, t_end, snaps),
        SolverKind::Implicit => operator::solve(z0, w0, &sys, dt, t_end, snaps),
    }
    .map_err(|e| HarnessError::solver(context, e))?;
    let summary = summarize(cfg, &trajectory, &sys)?;
    let warnings = cfg.compat_warning()?.into_iter().collect();
    Ok(RunOutput { trajectory, summary, warnings })
}

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct Written {
    pub dir: PathBuf,
    pub trajectory: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub summary: PathBuf,
}

pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Written> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let trajectory = dir.join("trajectory.csv");
    csv_io::write_rows_to(&trajectory, &out.trajectory.rows)?;
    let requested = &out.trajectory.snapshots;
    let mut snapshots = Vec::with_capacity(requested.len());
    for s in requested {
        let path = dir.join(csv_io::snapshot_file_name(s.t));
        csv_io::write_snapshot_to(&path, s)?;
        snapshots.push(path);
    }
    let summary = dir.join("summary.toml");
    let text = toml::to_string(&out.summary).map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(&summary, text).map_err(|e| HarnessError::io(&summary, e))?;
    Ok(Written { dir: dir.to_path_buf(), trajectory, snapshots, summary })
}

/// Simulates and writes `<out>/<name>/trajectory.csv`, the snapshot files and
/// `summary.toml`.
pub fn run(cfg: &ExperimentConfig) -> Result<(RunOutput, Written)> {
    let out = simulate(cfg)?;
    let written = write_outputs(&out, &cfg.output_dir().join(&cfg.name))?;
    Ok((out, written))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn zero_data_give_zero_trajectory() {
        for kind in [SolverKind::Characteristics, SolverKind::Upwind, SolverKind::Implicit] {
            let cfg = presets::zero().with_solver(kind, 50, 0.01);
            let out = simulate(&cfg).unwrap();
            assert!(out.trajectory.rows.iter().all(|r| r.values()[1..].iter().all(|v| *v == 0.0)));
            assert_eq!(out.summary.v_ratio, 0.0);
            assert!(out.summary.v_monotone);
        }
    }

    #[test]
    fn manifold_pairing_matches_exact_solution() {
        let mut cfg = presets::manifold();
        cfg.solver.dt = 0.01;
        let out = simulate(&cfg).unwrap();
        let sys = cfg.system().unwrap();
        // on the manifold <w, M> = z ||M||^2 and z = e^{-t}
        for r in &out.trajectory.rows {
            let exact = (-r.t).exp() * sys.gain_norm_sq();
            assert!((w_gain_pairing(r, &sys) - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn summary_of_short_reference_run() {
        let mut cfg = presets::paper_fig();
        cfg.run.t_end = 5.0;
        cfg.run.barbalat_from = vec![1.0, 4.0];
        cfg.solver.n = 200;
        let out = simulate(&cfg).unwrap();
        let s = &out.summary;
        assert_eq!(s.steps, 5000);
        assert!(s.v_monotone && s.v_ratio < 1.0);
        assert!(s.min_dv <= s.max_dv);
        assert_eq!(s.tails.len(), 2);
        assert!(s.tails[1].sup_abs_u <= s.tails[0].sup_abs_u);
        assert!(out.warnings.is_empty());
    }
}
