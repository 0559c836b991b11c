//! Experiment configuration. A config file is TOML; it may start from a
//! built-in preset (`preset = "name"`) and override any subset of keys.

use std::path::{Path, PathBuf};

use forwarding_core::characteristics::{CharSolverConfig, Interp};
use forwarding_core::{upwind, ClosedLoop64, ConeBounded64, Params64, SigmaKind};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::initial::Profile;
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SigmaConfig {
    Linear { rho: f64 },
    Saturation { rho: f64, lo: f64, hi: f64 },
    Arctan { theta: f64, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub z0: f64,
    #[serde(default)]
    pub w0: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Characteristics,
    Upwind,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpChoice {
    #[default]
    Linear,
    Cubic,
}

impl From<InterpChoice> for Interp {
    fn from(c: InterpChoice) -> Self {
        match c {
            InterpChoice::Linear => Interp::Linear,
            InterpChoice::Cubic => Interp::Cubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Grid cells: the render/quadrature grid for `characteristics`.
    pub n: usize,
    /// Time step; the implicit step `h` for `implicit`.
    pub dt: f64,
    /// History interpolation of the characteristics solver.
    #[serde(default)]
    pub interp: InterpChoice,
}

fn default_barbalat_from() -> Vec<f64> {
    vec![10.0, 25.0, 50.0, 75.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    /// Times at which `w` snapshots are written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Start times `T` of the Barbalat tail suprema over `[T, t_end]`.
    #[serde(default = "default_barbalat_from")]
    pub barbalat_from: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; overridden by `FWDSTAB_OUT_DIR`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub params: ParamsConfig,
    pub sigma: SigmaConfig,
    pub initial: InitialConfig,
    pub solver: SolverConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "FWDSTAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "out";

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML text. `source` names the origin in error messages.
    pub fn from_toml_str(text: &str, source: &Path) -> Result<Self> {
        let toml_err = |e| HarnessError::Toml { path: source.to_path_buf(), source: e };
        let mut table: toml::Table = toml::from_str(text).map_err(toml_err)?;
        let merged = match table.remove("preset") {
            Some(toml::Value::String(name)) => {
                let base = presets::find(&name)
                    .ok_or_else(|| config_err(format!("unknown preset `{name}` (see `fwdstab presets`)")))?;
                let mut base = base.to_table()?;
                merge(&mut base, table);
                base
            }
            Some(other) => return Err(config_err(format!("`preset` must be a string, got {other}"))),
            None => table,
        };
        let cfg: Self = merged.try_into().map_err(toml_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    /// A preset name, or a path to a TOML file.
    pub fn resolve(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.exists() {
            return Self::load(path);
        }
        match presets::find(arg) {
            Some(cfg) => Ok(cfg),
            None => Err(config_err(format!("`{arg}` is neither a config file nor a preset name"))),
        }
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn plant(&self) -> Result<Params64> {
        let p = self.params;
        Params64::new(p.a, p.lambda, p.gamma, p.mu).map_err(|e| HarnessError::solver("params", e))
    }

    pub fn cone_bounded(&self) -> Result<ConeBounded64> {
        let kind = match self.sigma {
            SigmaConfig::Linear { rho } => SigmaKind::Linear { rho },
            SigmaConfig::Saturation { rho, lo, hi } => SigmaKind::Saturation { rho, lo, hi },
            SigmaConfig::Arctan { theta, rho } => SigmaKind::Arctan { theta, rho },
        };
        ConeBounded64::from_kind(kind).map_err(|e| HarnessError::solver("sigma", e))
    }

    pub fn system(&self) -> Result<ClosedLoop64> {
        ClosedLoop64::with_cells(self.plant()?, self.cone_bounded()?, self.solver.n)
            .map_err(|e| HarnessError::solver("grid", e))
    }

    pub fn char_config(&self) -> CharSolverConfig<f64> {
        CharSolverConfig::new(self.solver.dt, self.solver.n).with_interp(self.solver.interp.into())
    }

    /// Structural checks, including CFL for the explicit solver.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(config_err(format!("name `{}` must be non-empty and contain no path separators", self.name)));
        }
        let params = self.plant()?;
        self.cone_bounded()?;
        if !self.initial.z0.is_finite() {
            return Err(config_err("initial.z0 must be finite"));
        }
        self.initial.w0.validate().map_err(config_err)?;
        let s = &self.solver;
        if !(s.dt > 0.0) || !s.dt.is_finite() {
            return Err(config_err(format!("solver.dt must be positive, got {}", s.dt)));
        }
        let r = &self.run;
        if !(r.t_end > 0.0) || !r.t_end.is_finite() {
            return Err(config_err(format!("run.t_end must be positive, got {}", r.t_end)));
        }
        // times past t_end are ignored
        if r.snapshots.iter().chain(&r.barbalat_from).any(|t| !t.is_finite() || *t < 0.0) {
            return Err(config_err("snapshot and barbalat times must be finite and nonnegative"));
        }
        let min_n = match s.kind {
            SolverKind::Implicit => 4,
            _ => 2,
        };
        if s.n < min_n {
            return Err(config_err(format!("solver.n must be at least {min_n} for this solver")));
        }
        match s.kind {
            SolverKind::Characteristics => {
                self.char_config().validate(&params).map_err(|e| HarnessError::solver("characteristics", e))?
            }
            SolverKind::Upwind => upwind::check_cfl(&self.system()?, s.dt).map_err(|e| HarnessError::solver("upwind", e))?,
            SolverKind::Implicit => {}
        }
        Ok(())
    }

    /// Compatibility warning for the initial data, if any.
    pub fn compat_warning(&self) -> Result<Option<String>> {
        let params = self.plant()?;
        let defect = self.initial.w0.compat_defect(self.initial.z0, &params);
        Ok((defect > 1e-9).then(|| {
            format!("initial data violate w0(0) = w0(1) + gamma z0 (defect {defect:.3e}); the solution is L2-only")
        }))
    }

    /// `FWDSTAB_OUT_DIR`, then `output.dir`, then `./out`.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
        }
    }

    /// Copy with a different solver and resolution.
    pub fn with_solver(&self, kind: SolverKind, n: usize, dt: f64) -> Self {
        let mut c = self.clone();
        c.solver.kind = kind;
        c.solver.n = n;
        c.solver.dt = dt;
        c
    }
}
