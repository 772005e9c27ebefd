//! Numerical laboratory for the stochastic evolutionary p-Laplace equation
//!
//! ```text
//! du - div(|∇u|^{p-2}∇u + f(u)) dt = ε H(u) dW     on (0,T) × (0,ℓ),   u = 0 on the boundary
//! ```
//!
//! The crate provides a semi-implicit Euler–Maruyama discretization (implicit
//! p-Laplacian and flux, explicit noise coefficient) on a uniform 1-D
//! finite-volume grid, plus the machinery built on top of it:
//!
//! * [`grid`]: mesh, nodal/edge fields and the discrete operators;
//! * [`stepper`]: the per-step nonlinear solve and the skeleton, small-noise
//!   and drift-shifted (Girsanov) drivers;
//! * [`control`]: piecewise-constant controls, the time projection, Brownian
//!   increments from counter-based streams;
//! * [`ldp`]: rate-function minimization and rare-event Monte Carlo;
//! * [`tci`]: shared-noise coupling estimates of the quadratic transport cost;
//! * [`analysis`]: the convex absolute-value regularizer, L¹ contraction runs,
//!   the energy-ledger auditor and the monotonicity sampler;
//! * [`io`]: CSV and binary snapshot formats.
//!
//! All numerical code is generic over a [`Scalar`]; the `*64` aliases at the
//! crate root fix it to `f64`, which is what the CLI and the Monte Carlo
//! drivers use in practice.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

pub mod analysis;
pub mod control;
mod error;
pub mod family;
pub mod grid;
pub mod io;
pub mod ldp;
pub mod rng;
pub mod stats;
pub mod stepper;
pub mod tci;
pub mod tridiag;

pub use crate::error::{Error, Result};

/// Real scalar type the solver is generic over.
///
/// Automatically implemented for every type with the required float
/// arithmetic; in practice `f32` and `f64`.
pub trait Scalar: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal or statistic.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{}

pub type Grid64 = grid::Grid<f64>;
pub type Field64 = grid::Field<f64>;
pub type EdgeField64 = grid::EdgeField<f64>;
pub type ModelParams64 = stepper::ModelParams<f64>;
pub type NewtonSettings64 = stepper::NewtonSettings<f64>;
pub type Trajectory64 = stepper::Trajectory<f64>;
pub type Control64 = control::Control<f64>;
pub type BrownianPath64 = control::BrownianPath<f64>;
pub type FluxFamily64 = family::FluxFamily<f64>;
pub type DiffusionFamily64 = family::DiffusionFamily<f64>;

pub use crate::control::{BrownianPath, Control};
pub use crate::family::{DiffusionFamily, FluxFamily};
pub use crate::grid::{EdgeField, Field, Grid};
pub use crate::stepper::{ModelParams, NewtonSettings, Trajectory};
