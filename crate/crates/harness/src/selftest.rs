//! Fast property battery behind `fwdstab selftest`.

use forwarding_core::characteristics::{self, CharSolverConfig, CharacteristicsSolver};
use forwarding_core::operator::{dissipativity_gap, implicit_step, resolvent_residual};
use forwarding_core::{build_gain, upwind, ClosedLoop64, ConeBounded64, Grid64, Params64, Quadrature, State64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::lasalle::zero_inflow;
use crate::presets;
use crate::sampling::{random_params, random_state};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn solver_err(e: forwarding_core::Error) -> HarnessError {
    HarnessError::solver("selftest", e)
}

fn catalog() -> [ConeBounded64; 3] {
    [
        ConeBounded64::linear(1.0).expect("valid"),
        ConeBounded64::saturation(1.0, -1.0, 1.0).expect("valid"),
        ConeBounded64::arctan(1.0, 1.0).expect("valid"),
    ]
}

fn unit_system(sigma: ConeBounded64, n: usize) -> Result<ClosedLoop64> {
    let p = Params64::new(1.0, 1.0, 1.0, 1.0).map_err(solver_err)?;
    ClosedLoop64::with_cells(p, sigma, n).map_err(solver_err)
}

fn sigma_check(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    let mut violations = 0;
    for s in catalog() {
        for _ in 0..1000 {
            let (a, b): (f64, f64) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let d = s.eval(a) - s.eval(b);
            if d * (a - b) < 0.0 || d.abs() > s.m() * (a - b).abs() * (1.0 + 1e-12) + 1e-15 {
                violations += 1;
            }
            worst = worst.max(if a != b { d.abs() / (s.m() * (a - b).abs()) } else { 0.0 });
        }
    }
    check("sigma monotone and m-Lipschitz", violations == 0, format!("violations {violations}, max slope/m {worst:.6}"))
}

fn gain_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let grid = Grid64::new(128).map_err(solver_err)?;
    let mut worst = 0.0f64;
    let mut orders = Vec::new();
    for _ in 0..20 {
        let p = random_params(rng);
        let m = build_gain(&p, &grid);
        worst = worst.max(m.boundary_defect().abs());
        let coarse = build_gain(&p, &Grid64::new(64).map_err(solver_err)?).residual().map_err(solver_err)?;
        let fine = m.residual().map_err(solver_err)?;
        orders.push((coarse / fine).log2());
    }
    let (lo, hi) = orders.iter().fold((f64::MAX, f64::MIN), |(l, h), q| (l.min(*q), h.max(*q)));
    Ok(vec![
        check("gain boundary identity", worst <= 1e-12, format!("max |M(0) - M(1) - gamma| = {worst:.3e}")),
        check("gain residual second order", lo >= 1.8 && hi <= 2.2, format!("observed orders in [{lo:.4}, {hi:.4}]")),
    ])
}

fn quadrature_check() -> Result<Check> {
    let mut worst = 0.0f64;
    for n in [2, 10, 333, 4096] {
        let q = Quadrature::new(&Grid64::new(n).map_err(solver_err)?);
        worst = worst.max((q.integrate(&vec![1.0; n + 1]).map_err(solver_err)? - 1.0).abs());
    }
    Ok(check("quadrature exact on constants", worst <= 1e-14, format!("max error {worst:.3e}")))
}

fn space_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (mut quad_err, mut lin_err) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let sys = ClosedLoop64::with_cells(random_params(rng), catalog()[k % 3], 64).map_err(solver_err)?;
        let s1 = random_state(rng, &sys);
        let s2 = random_state(rng, &sys);
        let alpha: f64 = rng.gen_range(-5.0..5.0);
        let v = sys.norm_x_sq(&s1).map_err(solver_err)?;
        let va = sys.norm_x_sq(&s1.scaled(alpha)).map_err(solver_err)?;
        quad_err = quad_err.max((va - alpha * alpha * v).abs() / (1.0 + va));
        let u12 = sys.feedback(&s1.sum(&s2)).map_err(solver_err)?;
        let u = sys.feedback(&s1).map_err(solver_err)? + sys.feedback(&s2).map_err(solver_err)?;
        lin_err = lin_err.max((u12 - u).abs() / (1.0 + u12.abs()));
    }
    Ok(vec![
        check("X-norm is a quadratic form", quad_err <= 1e-12, format!("max rel error {quad_err:.3e}")),
        check("feedback is linear", lin_err <= 1e-12, format!("max rel error {lin_err:.3e}")),
    ])
}

fn operator_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut worst_gap = f64::MIN;
    let mut worst_res = 0.0f64;
    let mut worst_contraction = 0.0f64;
    for sigma in catalog() {
        let sys = unit_system(sigma, 200)?;
        let dx = sys.grid().dx();
        for _ in 0..100 {
            let s1 = random_state(rng, &sys);
            let s2 = random_state(rng, &sys);
            let gap = dissipativity_gap(&s1, &s2, &sys).map_err(solver_err)?;
            worst_gap = worst_gap.max(gap / sys.norm_x_sq(&s1.difference(&s2)).map_err(solver_err)?);
        }
        for h in [0.1, 1.0] {
            for _ in 0..10 {
                let r1 = random_state(rng, &sys);
                let r2 = random_state(rng, &sys);
                let z1 = implicit_step(&r1, h, &sys).map_err(solver_err)?;
                let z2 = implicit_step(&r2, h, &sys).map_err(solver_err)?;
                let res = sys.norm_x(&resolvent_residual(&z1, &r1, h, &sys).map_err(solver_err)?).map_err(solver_err)?;
                worst_res = worst_res.max(res / (dx * dx * sys.norm_x(&r1).map_err(solver_err)?));
                let ratio = sys.norm_x(&z1.difference(&z2)).map_err(solver_err)?
                    / sys.norm_x(&r1.difference(&r2)).map_err(solver_err)?;
                worst_contraction = worst_contraction.max(ratio);
            }
        }
    }
    Ok(vec![
        check("dissipativity sweep", worst_gap <= 1e-3, format!("max gap / |s1 - s2|_X^2 = {worst_gap:.3e}")),
        check("resolvent identity", worst_res <= 5.0, format!("max |residual|_X / (dx^2 |rhs|_X) = {worst_res:.4}")),
        check("implicit step contracts", worst_contraction <= 1.0 + 1e-6, format!("max ratio {worst_contraction:.6}")),
    ])
}

fn trajectory_checks() -> Result<Vec<Check>> {
    let mut cfg = presets::paper_fig();
    let params = cfg.plant()?;
    let sigma = cfg.cone_bounded()?;
    cfg.solver.n = 200;
    let w0 = cfg.initial.w0.function(&params);
    let sys = cfg.system()?;
    let t_end = 5.0;
    let chars = characteristics::solve(1.0, &w0, &params, &sigma, &CharSolverConfig::new(1e-3, 200), t_end)
        .map_err(solver_err)?;
    let up = upwind::solve(1.0, &w0, &sys, 2.5e-3, t_end, &[]).map_err(solver_err)?;
    let imp = forwarding_core::operator::solve(1.0, &w0, &sys, 1e-2, t_end, &[]).map_err(solver_err)?;
    let worst = [&chars, &up, &imp]
        .iter()
        .map(|tr| tr.max_v_increment().unwrap_or(0.0) / tr.first().map(|r| r.v).unwrap_or(1.0))
        .fold(f64::MIN, f64::max);
    let monotone = check("Lyapunov decay on all solvers", worst <= 1e-6, format!("max dV / V(0) = {worst:.3e}"));

    let mut solver = CharacteristicsSolver::new(params, sigma, CharSolverConfig::new(2e-3, 100), 1.0, &w0)
        .map_err(solver_err)?;
    let mut compatible = true;
    for _ in 0..500 {
        let st: State64 = solver.step().map_err(solver_err)?;
        compatible &= st.is_compatible(params.gamma());
    }
    let compat = check("compatibility propagates", compatible, "500 characteristics steps".into());
    Ok(vec![monotone, compat])
}

fn zero_inflow_check() -> Result<Check> {
    let cfg = presets::bump();
    let p = cfg.plant()?;
    let r = zero_inflow(cfg.initial.w0.function(&p), 1.0, 500, 1e-3, 1.5)?;
    let ok = r.e1_drift_before_exit <= 1e-6 && r.e1_after_empty <= 1e-10 && r.e2_decay_excess <= 1e-6;
    Ok(check(
        "zero-inflow transport empties",
        ok,
        format!(
            "E1 drift {:.3e}, E1 after 1/lambda {:.3e}, E2 excess {:.3e}",
            r.e1_drift_before_exit, r.e1_after_empty, r.e2_decay_excess
        ),
    ))
}

pub fn selftest(seed: u64) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![sigma_check(&mut rng)];
    checks.extend(gain_checks(&mut rng)?);
    checks.push(quadrature_check()?);
    checks.extend(space_checks(&mut rng)?);
    checks.extend(operator_checks(&mut rng)?);
    checks.extend(trajectory_checks()?);
    checks.push(zero_inflow_check()?);
    Ok(SelftestReport { checks })
}
