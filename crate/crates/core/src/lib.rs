pub mod energy;
pub mod error;
pub mod gamma;
pub mod grid;
pub mod minimize;
pub mod operators;
pub mod physical;
pub mod potential;
pub mod quadrature;

pub use energy::{EnergyBreakdown, EnergyParams};
pub use error::{Error, Result};
pub use gamma::{CellProfile, InterfaceGeometry};
pub use grid::{make_grid, Axis, Boundary, Grid, Region, ScalarField, SpectralField};
pub use physical::PhysicalParams;
pub use potential::Potential;
