//! Experiment harness for the forwarding closed loop: TOML configuration,
//! built-in presets, CSV output, solver comparison, the LaSalle diagnostics
//! and the property self-test behind the `fwdstab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod initial;
pub mod lasalle;
pub mod presets;
pub mod runner;
pub mod sampling;
pub mod selftest;

pub use config::{ExperimentConfig, SolverKind};
pub use error::{HarnessError, Result};
pub use runner::{run, simulate, RunOutput, Summary};
