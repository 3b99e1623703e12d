//! Adaptive semi-Lagrangian Vlasov solver on interpolating wavelets.
//!
//! The distribution function `f(x, v)` lives on a dyadic phase-space grid and
//! is stored as coarse point values plus the interpolating-wavelet details that
//! exceed a threshold. Each time step advects along `x` and then `v`, moving
//! only the nodes that the previous mesh predicts will matter.

pub mod error;
pub mod fields;
pub mod grid;
pub mod io;
pub mod mesh;
pub mod mra;
pub mod mra2d;
pub mod scenarios;
pub mod semilag;

pub use error::{Error, Result};
pub use grid::{Axis, DyadicNode2D, FinePos, NodeKind, PhaseGrid};
pub use mra::{Boundary, Coeffs1D, PredictionStencil};
pub use mra2d::{Coeffs2D, Grid2, SparseRep};
pub use scenarios::{ScenarioConfig, ScenarioKind};
pub use semilag::{Distribution, SimState, Splitting, Stepper};
