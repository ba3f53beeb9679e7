//! Finite-volume ADER `P0PM` schemes for hyperbolic conservation laws, with the
//! per-cell numerical entropy production computed at every step and used as an
//! a-posteriori indicator for local order reduction.
//!
//! The numerical core is generic over the floating point type (see [`Real`]);
//! concrete `f64`/`f32` aliases are exported at the crate root.

pub mod adaptivity;
pub mod ader;
pub mod cli_io;
pub mod entropy;
pub mod equations;
pub mod error;
pub mod fluxes;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod reconstruction;
pub mod scalar;
pub mod solver;
pub mod steppers;

pub use error::{Error, Result};
pub use scalar::Real;

pub type System64 = equations::System<f64>;
pub type System32 = equations::System<f32>;
pub type Grid64 = mesh::Grid<f64>;
pub type Grid32 = mesh::Grid<f32>;
pub type Field64 = mesh::Field<f64>;
pub type Field32 = mesh::Field<f32>;
pub type BoundarySpec64 = mesh::BoundarySpec<f64>;
pub type GalerkinMatrices64 = ader::GalerkinMatrices<f64>;
pub type EntropyField64 = entropy::EntropyField<f64>;
pub type Solver64 = solver::Solver<f64>;
pub type Solver32 = solver::Solver<f32>;
