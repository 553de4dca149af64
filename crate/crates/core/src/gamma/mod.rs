//! Sharp-interface limit: the cell problem for the surface energy density
//! `m_d`, mollified indicators, recovery sequences and the comparison of
//! `F_ε` with `m_d · Per`.

pub mod cell;
pub mod compare;
pub mod geometry;
pub mod mollifier;
pub mod recovery;

pub use cell::{
    cell_energy, estimate_md, geometric_grid, optimize_profile, transverse_stability, CellConfig, CellEnergy,
    CellEstimate, CellProfile, CellSolve,
};
pub use compare::{gamma_compare, CompareOptions, CompareRow, CompareTable};
pub use geometry::{measure_interface, perimeter, InterfaceGeometry};
pub use mollifier::mollify_indicator;
pub use recovery::{build_polygon_recovery, build_recovery, PolygonRecoveryConfig};
