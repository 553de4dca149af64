//! Comparison of `F_ε` on recovery fields with `m̂_d · Per`.
//!
//! For a fixed cell scale `ε₀` the flat recovery energy is exactly
//! `Per · F_{ε₀}[w]` at every `ε`, so the sweep couples the two scales:
//! `ε₀ = min(1, ε/(2s))` keeps the transition layer at half-width `s` and
//! lets `ε₀` shrink with `ε`.

use std::io::Write;
use std::sync::Arc;

use super::cell::{estimate_md, optimize_profile, CellConfig, CellProfile};
use super::geometry::{perimeter, InterfaceGeometry};
use super::recovery::{build_polygon_recovery, build_recovery, PolygonRecoveryConfig};
use crate::energy::{f_v, EnergyParams};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    pub cell: CellConfig,
    /// Half-width `s` of the transition layer. Polygons cap it at half the
    /// edge-strip width.
    pub layer_half_width: f64,
    /// Overrides the coupled choice of `ε₀` with a fixed value.
    pub fixed_eps0: Option<f64>,
    pub polygon: PolygonRecoveryConfig,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            cell: CellConfig::default(),
            layer_half_width: 0.2,
            fixed_eps0: None,
            polygon: PolygonRecoveryConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub eps: f64,
    pub eps0: f64,
    pub energy: f64,
    pub md_times_per: f64,
    pub ratio: f64,
    /// `energy - m̂_d · Per`.
    pub residual: f64,
    /// Cell energy of the profile used, `m̂_d + ρ`.
    pub cell_energy: f64,
    pub l2_to_sharp: f64,
    /// For polygons, `C` in `energy = cell_energy · Per + C δ`.
    pub gluing_constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareTable {
    pub md: f64,
    pub md_eps: f64,
    pub perimeter: f64,
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    /// Whether `|ratio - 1|` decreases over the last two rows.
    pub fn trend_ok(&self) -> bool {
        let n = self.rows.len();
        n >= 2 && (self.rows[n - 1].ratio - 1.0).abs() < (self.rows[n - 2].ratio - 1.0).abs()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "eps,energy,md_times_per,ratio")?;
        for r in &self.rows {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", r.eps, r.energy, r.md_times_per, r.ratio)?;
        }
        Ok(())
    }
}

/// Runs the recovery construction at every `ε` and compares its energy to
/// `m̂_d · Per`, with `m̂_d` estimated by the cell problem.
pub fn gamma_compare(
    grid: &Arc<Grid>,
    geometry: &InterfaceGeometry,
    pot: &Potential,
    q: f64,
    eps_list: &[f64],
    opts: &CompareOptions,
) -> Result<CompareTable> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty eps list".into()));
    }
    let per = perimeter(geometry, grid)?;
    let est = estimate_md(pot, q, &opts.cell)?;
    let sharp = geometry.sharp_field(grid)?;
    let half_width = match geometry {
        InterfaceGeometry::FlatSlab { .. } => opts.layer_half_width,
        InterfaceGeometry::Polygon { .. } => opts.layer_half_width.min(0.5 * opts.polygon.eta),
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let eps0 = match opts.fixed_eps0 {
            Some(e) => e,
            None => (eps / (2.0 * half_width)).min(1.0),
        };
        let start = CellProfile::tanh(opts.cell.knots, opts.cell.clamp, eps0.min(0.5))?;
        let solve = optimize_profile(&start, eps0, q, pot, opts.cell.max_iter)?;
        let field = match geometry {
            InterfaceGeometry::FlatSlab { .. } => build_recovery(grid, geometry, &solve.profile, eps0, eps)?,
            InterfaceGeometry::Polygon { .. } => {
                build_polygon_recovery(grid, geometry, &solve.profile, eps0, eps, &opts.polygon)?
            }
        };
        let energy = f_v(&field, &EnergyParams::new(eps, q)?, pot, None)?.total;
        let md_times_per = est.md * per;
        rows.push(CompareRow {
            eps,
            eps0,
            energy,
            md_times_per,
            ratio: energy / md_times_per,
            residual: energy - md_times_per,
            cell_energy: solve.energy,
            l2_to_sharp: field.axpy(-1.0, &sharp)?.norm_l2(),
            gluing_constant: matches!(geometry, InterfaceGeometry::Polygon { .. })
                .then(|| (energy - solve.energy * per) / opts.polygon.delta),
        });
    }
    Ok(CompareTable { md: est.md, md_eps: est.argmin_eps, perimeter: per, rows })
}
