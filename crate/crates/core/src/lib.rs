//! Forwarding stabilization of a transport equation driven through its
//! inflow boundary by a scalar ODE with a cone-bounded (saturated) input.
//!
//! ```text
//! z'(t)      = -a z(t) + sigma(u(t))
//! w_t + lambda w_x = 0                on (0, 1)
//! w(t, 0)    = w(t, 1) + gamma z(t)
//! u(t)       = mu <w(t) - M z(t), M>,   M(x) = gamma e^{a x / lambda} / (1 - e^{a / lambda})
//! ```
//!
//! The crate provides the model types, the discrete state space and its
//! Lyapunov function, three independent integrators (exact characteristics,
//! upwind + RK4, backward Euler through the resolvent) and the empirical
//! dissipativity checks of the closed-loop generator.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the `f64` instantiations used by the harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod closed_loop;
pub mod error;
pub mod model;
pub mod operator;
pub mod scalar;
pub mod spaces;
pub mod trajectory;
pub mod upwind;

pub use closed_loop::ClosedLoop;
pub use error::{Error, Result};
pub use model::{build_gain, gain_closed_form, gain_residual, ConeBounded, GainProfile, Grid, Params, SigmaKind, State};
pub use scalar::Scalar;
pub use spaces::Quadrature;
pub use trajectory::{Snapshot, Trajectory, TrajectoryRow};

pub type Params64 = Params<f64>;
pub type ConeBounded64 = ConeBounded<f64>;
pub type Grid64 = Grid<f64>;
pub type GainProfile64 = GainProfile<f64>;
pub type State64 = State<f64>;
pub type ClosedLoop64 = ClosedLoop<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type TrajectoryRow64 = TrajectoryRow<f64>;

pub type Params32 = Params<f32>;
pub type ClosedLoop32 = ClosedLoop<f32>;
pub type State32 = State<f32>;
