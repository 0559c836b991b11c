//! Built-in experiments.

use crate::config::{
    ExperimentConfig, InitialConfig, InterpChoice, OutputConfig, ParamsConfig, RunConfig, SigmaConfig, SolverConfig,
    SolverKind,
};
use crate::initial::{Profile, Term};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

const UNIT_PLANT: ParamsConfig = ParamsConfig { a: 1.0, lambda: 1.0, gamma: 1.0, mu: 1.0 };
const UNIT_ARCTAN: SigmaConfig = SigmaConfig::Arctan { theta: 1.0, rho: 1.0 };

fn experiment(name: &str, sigma: SigmaConfig, z0: f64, w0: Vec<Term>, solver: SolverConfig, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        params: UNIT_PLANT,
        sigma,
        initial: InitialConfig { z0, w0: Profile(w0) },
        solver,
        run: RunConfig {
            t_end,
            snapshots: vec![],
            barbalat_from: [10.0, 25.0, 50.0, 75.0].into_iter().filter(|t| *t <= t_end).collect(),
        },
        output: OutputConfig::default(),
    }
}

fn solver(kind: SolverKind, n: usize, dt: f64) -> SolverConfig {
    SolverConfig { kind, n, dt, interp: InterpChoice::Linear }
}

/// `w0 = sin(2 pi x) - x`.
fn reference_profile() -> Vec<Term> {
    vec![Term::Sine { amplitude: 1.0, frequency: 1.0, phase: 0.0 }, Term::Polynomial { coeffs: vec![0.0, -1.0] }]
}

/// Reference run: `lambda = a = gamma = 1`, `sigma = atan`, `mu = 1`,
/// `z0 = 1`, `w0 = sin(2 pi x) - x`, characteristics solver, `t in [0, 100]`.
pub fn paper_fig() -> ExperimentConfig {
    let mut cfg = experiment(
        "paper-fig",
        UNIT_ARCTAN,
        1.0,
        reference_profile(),
        solver(SolverKind::Characteristics, 1000, 1e-3),
        100.0,
    );
    cfg.run.snapshots = vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0];
    cfg
}

pub fn paper_fig_upwind() -> ExperimentConfig {
    let mut cfg = paper_fig().with_solver(SolverKind::Upwind, 400, 1.25e-3);
    cfg.name = "paper-fig-upwind".into();
    cfg.run.t_end = 10.0;
    cfg.run.snapshots = vec![0.0, 1.0, 5.0, 10.0];
    cfg.run.barbalat_from = vec![5.0];
    cfg
}

pub fn paper_fig_implicit() -> ExperimentConfig {
    let mut cfg = paper_fig_upwind().with_solver(SolverKind::Implicit, 400, 1e-2);
    cfg.name = "paper-fig-implicit".into();
    cfg
}

/// Starts on the invariant manifold `w = M z`, where the exact solution is
/// `z = e^{-a t}`, `w = M z`; smooth, so it exposes the RK4 order.
pub fn manifold() -> ExperimentConfig {
    let mut s = solver(SolverKind::Characteristics, 200, 0.05);
    s.interp = InterpChoice::Cubic;
    experiment("manifold", UNIT_ARCTAN, 1.0, vec![Term::Gain { scale: 1.0 }], s, 3.0)
}

/// Smooth bump supported in `[0.2, 0.4]` with `z0 = 0`.
pub fn bump() -> ExperimentConfig {
    experiment(
        "bump",
        UNIT_ARCTAN,
        0.0,
        vec![Term::Bump { center: 0.3, half_width: 0.1, amplitude: 1.0 }],
        solver(SolverKind::Characteristics, 1000, 1e-3),
        10.0,
    )
}

pub fn zero() -> ExperimentConfig {
    experiment("zero", UNIT_ARCTAN, 0.0, vec![], solver(SolverKind::Characteristics, 200, 1e-2), 10.0)
}

/// Hard input saturation at `|sigma| <= 0.5` with a large initial `z`.
pub fn saturated() -> ExperimentConfig {
    experiment(
        "saturated",
        SigmaConfig::Saturation { rho: 1.0, lo: -0.5, hi: 0.5 },
        2.0,
        vec![Term::Polynomial { coeffs: vec![1.0, -2.0] }, Term::Sine { amplitude: 0.5, frequency: 2.0, phase: 0.0 }],
        solver(SolverKind::Characteristics, 500, 2e-3),
        50.0,
    )
}

pub fn all() -> Vec<Preset> {
    vec![
        Preset {
            name: "paper-fig",
            description: "reference closed loop, characteristics solver, t in [0, 100]",
            config: paper_fig(),
        },
        Preset {
            name: "paper-fig-upwind",
            description: "paper-fig data on the upwind + RK4 solver, n = 400, t in [0, 10]",
            config: paper_fig_upwind(),
        },
        Preset {
            name: "paper-fig-implicit",
            description: "paper-fig data on the backward-Euler resolvent stepper, h = 0.01, t in [0, 10]",
            config: paper_fig_implicit(),
        },
        Preset {
            name: "manifold",
            description: "w0 = M z0 on the invariant manifold; exact z = e^{-t}",
            config: manifold(),
        },
        Preset { name: "bump", description: "smooth bump in [0.2, 0.4], z0 = 0", config: bump() },
        Preset { name: "zero", description: "zero initial data", config: zero() },
        Preset {
            name: "saturated",
            description: "saturation at +-0.5 with z0 = 2",
            config: saturated(),
        },
    ]
}

pub fn find(name: &str) -> Option<ExperimentConfig> {
    all().into_iter().find(|p| p.name == name).map(|p| p.config)
}
