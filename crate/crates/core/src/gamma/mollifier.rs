//! Mollified indicators `φ_ε = (χ_P - χ_{P^c}) * Ψ_ε`.
//!
//! The kernel is a product of one-dimensional bumps `c·exp(-1/(1-t²))`, each
//! of half-width `ε/√d`, so its support lies in the ball of radius `ε`. The
//! convolution with a half-space or a polygon reduces to the bump's
//! cumulative distribution `G`, kept as a dense table with cubic Hermite
//! interpolation.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::geometry::InterfaceGeometry;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::quadrature::{gauss_legendre, legendre_rule};

const TABLE_SIZE: usize = 4096;
const OUTER_PANELS: usize = 8;

fn raw_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

struct BumpTable {
    norm: f64,
    cdf: Vec<f64>,
}

fn table() -> &'static BumpTable {
    static TABLE: OnceLock<BumpTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let norm = gauss_legendre(raw_bump, -1.0, 1.0, 64);
        let (x, w) = legendre_rule(12);
        let h = 2.0 / TABLE_SIZE as f64;
        let mut cdf = Vec::with_capacity(TABLE_SIZE + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..TABLE_SIZE {
            let a = -1.0 + i as f64 * h;
            let part: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * raw_bump(a + 0.5 * h * (xi + 1.0))).sum();
            acc += 0.5 * h * part / norm;
            cdf.push(acc);
        }
        BumpTable { norm, cdf }
    })
}

/// Normalized one-dimensional bump on `(-1, 1)`.
pub fn bump(t: f64) -> f64 {
    raw_bump(t) / table().norm
}

/// `G(s) = ∫_{-1}^s bump`.
pub fn bump_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let t = table();
    let h = 2.0 / TABLE_SIZE as f64;
    let y = (s + 1.0) / h;
    let i = (y.floor() as usize).min(TABLE_SIZE - 1);
    let u = y - i as f64;
    let (a, b) = (-1.0 + i as f64 * h, -1.0 + (i + 1) as f64 * h);
    let (g0, g1) = (t.cdf[i], t.cdf[i + 1]);
    let (m0, m1) = (h * bump(a), h * bump(b));
    let (u2, u3) = (u * u, u * u * u);
    (2.0 * u3 - 3.0 * u2 + 1.0) * g0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * g1 + (u3 - u2) * m1
}

/// Per-axis half-width of `Ψ_ε` in dimension `d`.
pub fn kernel_half_width(eps: f64, d: usize) -> f64 {
    eps / (d as f64).sqrt()
}

/// Samples `φ_ε` for the geometry on the grid.
pub fn mollify_indicator(grid: &Arc<Grid>, geometry: &InterfaceGeometry, eps: f64) -> Result<ScalarField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    geometry.validate(grid)?;
    let r = kernel_half_width(eps, grid.dim());
    let values: Vec<f64> =
        (0..grid.len()).into_par_iter().map(|i| mollified_value(geometry, &grid.point(i), r)).collect();
    ScalarField::new(grid.clone(), values)
}

/// `φ_ε(x)` with per-axis kernel half-width `r`.
pub fn mollified_value(geometry: &InterfaceGeometry, x: &[f64], r: f64) -> f64 {
    match geometry {
        InterfaceGeometry::FlatSlab { axis, offset } => 1.0 - 2.0 * bump_cdf((x[*axis] - offset) / r),
        InterfaceGeometry::Polygon { vertices } => {
            let dist = geometry.distance_to_interface(x);
            let inside = geometry.is_inside(x);
            let sign = if inside { 1.0 } else { -1.0 };
            if dist >= r * std::f64::consts::SQRT_2 {
                return sign;
            }
            2.0 * polygon_convolution(vertices, x, r).clamp(0.0, 1.0) - 1.0
        }
    }
}

/// `(χ_P * Ψ)(x)` for a simple polygon, by exact slice integrals in the
/// second coordinate and Gauss panels in the first, split at vertex abscissas.
fn polygon_convolution(vertices: &[[f64; 2]], x: &[f64], r: f64) -> f64 {
    let (lo, hi) = (x[0] - r, x[0] + r);
    let mut breaks: Vec<f64> = vec![lo, hi];
    breaks.extend(vertices.iter().map(|v| v[0]).filter(|&v| v > lo && v < hi));
    breaks.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        total += gauss_legendre(
            |z1| {
                let weight = bump((x[0] - z1) / r) / r;
                if weight == 0.0 {
                    return 0.0;
                }
                let slice: f64 = polygon_slice(vertices, z1)
                    .chunks_exact(2)
                    .map(|ab| bump_cdf((x[1] - ab[0]) / r) - bump_cdf((x[1] - ab[1]) / r))
                    .sum();
                weight * slice
            },
            w[0],
            w[1],
            OUTER_PANELS,
        );
    }
    total
}

/// Sorted crossings of the vertical line `z1` with the polygon boundary;
/// consecutive pairs bound the interior.
fn polygon_slice(vertices: &[[f64; 2]], z1: f64) -> Vec<f64> {
    let n = vertices.len();
    let mut ys: Vec<f64> = (0..n)
        .filter_map(|i| {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            if (p[0] <= z1) != (q[0] <= z1) {
                Some(p[1] + (z1 - p[0]) / (q[0] - p[0]) * (q[1] - p[1]))
            } else {
                None
            }
        })
        .collect();
    ys.sort_by(f64::total_cmp);
    ys
}
