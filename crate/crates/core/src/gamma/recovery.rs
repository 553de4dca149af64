//! Recovery fields approaching a sharp interface.
//!
//! A flat interface gets the rescaled cell profile `w(ε₀ t / ε)` in the
//! slab `|t| ≤ ε/(2ε₀)` around it. A polygon gets the mollified indicator
//! everywhere, blended into the per-edge profile away from the vertices by a
//! cut-off `η_δ` that vanishes within `δ` of a vertex and equals one beyond
//! `2δ`.

use std::sync::Arc;

use rayon::prelude::*;

use super::cell::CellProfile;
use super::geometry::InterfaceGeometry;
use super::mollifier::{kernel_half_width, mollified_value};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Degree-seven smoothstep, `C³` with `S(0) = 0`, `S(1) = 1`.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let t4 = t * t * t * t;
    t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
}

/// Flat-interface recovery field `w_n` for a slab geometry.
pub fn build_recovery(
    grid: &Arc<Grid>,
    geometry: &InterfaceGeometry,
    profile: &CellProfile,
    eps0: f64,
    eps: f64,
) -> Result<ScalarField> {
    let InterfaceGeometry::FlatSlab { axis, offset } = *geometry else {
        return Err(Error::Geometry("flat recovery needs a slab geometry".into()));
    };
    geometry.validate(grid)?;
    if !(eps0 > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter(format!("scales must be positive, got eps0 = {eps0}, eps = {eps}")));
    }
    let half = eps / (2.0 * eps0);
    let a = grid.axis(axis);
    if offset - half < a.origin || offset + half > a.end() {
        return Err(Error::Geometry(format!(
            "slab of half-width {half:.4} around {offset} exceeds [{}, {}]",
            a.origin,
            a.end()
        )));
    }
    let scale = eps0 / eps;
    ScalarField::from_fn(grid.clone(), |x| profile.value((x[axis] - offset) * scale))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonRecoveryConfig {
    /// Cut-off radius around the vertices.
    pub delta: f64,
    /// Half-thickness of the strips around each edge, below `δ/2`.
    pub eta: f64,
}

impl Default for PolygonRecoveryConfig {
    fn default() -> Self {
        Self { delta: 0.1, eta: 0.04 }
    }
}

/// Recovery field for a polygon whose closure lies inside the box at
/// distance more than `ε` from its boundary.
pub fn build_polygon_recovery(
    grid: &Arc<Grid>,
    geometry: &InterfaceGeometry,
    profile: &CellProfile,
    eps0: f64,
    eps: f64,
    cfg: &PolygonRecoveryConfig,
) -> Result<ScalarField> {
    let InterfaceGeometry::Polygon { vertices } = geometry else {
        return Err(Error::Geometry("polygon recovery needs a polygon geometry".into()));
    };
    geometry.validate(grid)?;
    if !(cfg.delta > 0.0 && cfg.eta > 0.0 && cfg.eta < 0.5 * cfg.delta) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eta < delta/2, got delta = {}, eta = {}",
            cfg.delta, cfg.eta
        )));
    }
    let half = eps / (2.0 * eps0);
    if half.max(eps) >= cfg.eta {
        return Err(Error::Geometry(format!(
            "transition layer {:.4} does not fit in edge strips of half-width {}",
            half.max(eps),
            cfg.eta
        )));
    }
    for v in vertices {
        for (k, a) in grid.axes().iter().enumerate() {
            if v[k] - a.origin <= eps || a.end() - v[k] <= eps {
                return Err(Error::Geometry("polygon must stay more than eps inside the domain".into()));
            }
        }
    }
    let orientation = geometry.signed_area().unwrap_or(1.0).signum();
    let r = kernel_half_width(eps, 2);
    let n = vertices.len();
    let edges: Vec<Edge> = (0..n).map(|i| Edge::new(vertices[i], vertices[(i + 1) % n], orientation)).collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let x = grid.point(flat);
            let phi = mollified_value(geometry, &x, r);
            let vertex_dist = vertices
                .iter()
                .map(|v| ((x[0] - v[0]).powi(2) + (x[1] - v[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            for e in &edges {
                let (along, normal) = e.local(&x);
                if along >= 0.5 * cfg.delta && along <= e.length - 0.5 * cfg.delta && normal.abs() < cfg.eta {
                    let cut = smoothstep((vertex_dist - cfg.delta) / cfg.delta);
                    let w = profile.value(normal * eps0 / eps);
                    return cut * w + (1.0 - cut) * phi;
                }
            }
            phi
        })
        .collect();
    ScalarField::new(grid.clone(), values)
}

struct Edge {
    origin: [f64; 2],
    tangent: [f64; 2],
    outward: [f64; 2],
    length: f64,
}

impl Edge {
    fn new(p: [f64; 2], q: [f64; 2], orientation: f64) -> Self {
        let d = [q[0] - p[0], q[1] - p[1]];
        let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let tangent = [d[0] / length, d[1] / length];
        // counter-clockwise polygons have the interior on the left
        let outward = [orientation * tangent[1], -orientation * tangent[0]];
        Self { origin: p, tangent, outward, length }
    }

    fn local(&self, x: &[f64]) -> (f64, f64) {
        let r = [x[0] - self.origin[0], x[1] - self.origin[1]];
        (r[0] * self.tangent[0] + r[1] * self.tangent[1], r[0] * self.outward[0] + r[1] * self.outward[1])
    }
}
