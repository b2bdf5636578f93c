//! Self-similar blow-up for the one-dimensional scale-invariant inviscid
//! porous medium system: profile construction, evolution, weighted norms and
//! linearized-operator diagnostics.

pub mod error;
pub mod grid;
pub mod quadrature;
pub mod samples;
pub mod shooting;

pub use error::{Error, Result};
pub use grid::{AngularGrid, GridFunction, NodeFamily, Parity};
pub mod biot_savart;
pub mod evolution;
pub mod linearized;
pub mod ode;
pub mod profile;
pub mod weighted;
