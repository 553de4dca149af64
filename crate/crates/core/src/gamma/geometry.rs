//! Target interfaces and their perimeters inside the grid box.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Interface of a two-phase target field. The `+1` phase is `x[axis] <
/// offset` for a slab and the interior of the polygon otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum InterfaceGeometry {
    FlatSlab {
        axis: usize,
        offset: f64,
    },
    /// Simple polygon in two dimensions, vertices in order.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

fn box_of(grid: &Grid) -> Vec<(f64, f64)> {
    grid.axes().iter().map(|a| (a.origin, a.end())).collect()
}

fn segment_distance(x: [f64; 2], p: [f64; 2], q: [f64; 2]) -> (f64, f64) {
    let d = [q[0] - p[0], q[1] - p[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let s = (((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let c = [p[0] + s * d[0] - x[0], p[1] + s * d[1] - x[1]];
    ((c[0] * c[0] + c[1] * c[1]).sqrt(), s)
}

impl InterfaceGeometry {
    pub fn square(centre: [f64; 2], side: f64) -> Self {
        let h = 0.5 * side;
        let [cx, cy] = centre;
        InterfaceGeometry::Polygon {
            vertices: vec![[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]],
        }
    }

    /// Signed area of a polygon, `None` for a slab.
    pub fn signed_area(&self) -> Option<f64> {
        match self {
            InterfaceGeometry::FlatSlab { .. } => None,
            InterfaceGeometry::Polygon { vertices } => {
                let n = vertices.len();
                Some(
                    0.5 * (0..n)
                        .map(|i| {
                            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                            p[0] * q[1] - q[0] * p[1]
                        })
                        .sum::<f64>(),
                )
            }
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            InterfaceGeometry::FlatSlab { axis, offset } => {
                if *axis >= grid.dim() {
                    return Err(Error::Geometry(format!("slab axis {axis} exceeds dimension {}", grid.dim())));
                }
                let a = grid.axis(*axis);
                if !(*offset > a.origin && *offset < a.end()) {
                    return Err(Error::Geometry(format!("slab offset {offset} outside the domain")));
                }
                Ok(())
            }
            InterfaceGeometry::Polygon { vertices } => {
                if grid.dim() != 2 {
                    return Err(Error::Geometry("polygons need a two-dimensional grid".into()));
                }
                if vertices.len() < 3 || vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::Geometry("polygon needs at least three finite vertices".into()));
                }
                let area = self.signed_area().unwrap_or(0.0);
                if area.abs() < 1e-14 {
                    return Err(Error::Geometry("polygon has zero area".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_inside(&self, x: &[f64]) -> bool {
        match self {
            InterfaceGeometry::FlatSlab { axis, offset } => x[*axis] < *offset,
            InterfaceGeometry::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    if (p[1] > x[1]) != (q[1] > x[1]) {
                        let cross = p[0] + (x[1] - p[1]) / (q[1] - p[1]) * (q[0] - p[0]);
                        if x[0] < cross {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Sharp target value `±1`.
    pub fn sharp_value(&self, x: &[f64]) -> f64 {
        if self.is_inside(x) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn distance_to_interface(&self, x: &[f64]) -> f64 {
        match self {
            InterfaceGeometry::FlatSlab { axis, offset } => (x[*axis] - offset).abs(),
            InterfaceGeometry::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance([x[0], x[1]], vertices[i], vertices[(i + 1) % n]).0)
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Sharp field sampled on the grid.
    pub fn sharp_field(&self, grid: &std::sync::Arc<Grid>) -> Result<ScalarField> {
        self.validate(grid)?;
        ScalarField::from_fn(grid.clone(), |x| self.sharp_value(x))
    }
}

/// `H^{d-1}` of the interface inside the grid box. Polygon edges are clipped
/// to the box and portions lying on its boundary are dropped.
pub fn perimeter(geometry: &InterfaceGeometry, grid: &Grid) -> Result<f64> {
    geometry.validate(grid)?;
    let bounds = box_of(grid);
    match geometry {
        InterfaceGeometry::FlatSlab { axis, .. } => {
            Ok(bounds.iter().enumerate().filter(|(i, _)| i != axis).map(|(_, (a, b))| b - a).product())
        }
        InterfaceGeometry::Polygon { vertices } => {
            let n = vertices.len();
            let mut total = 0.0;
            for i in 0..n {
                let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                let Some((s0, s1)) = clip_segment(p, q, &bounds) else {
                    continue;
                };
                let mid = [p[0] + 0.5 * (s0 + s1) * (q[0] - p[0]), p[1] + 0.5 * (s0 + s1) * (q[1] - p[1])];
                let on_boundary = (0..2).any(|k| {
                    let tol = 1e-12 * (bounds[k].1 - bounds[k].0);
                    (p[k] - q[k]).abs() <= tol
                        && ((mid[k] - bounds[k].0).abs() <= tol || (mid[k] - bounds[k].1).abs() <= tol)
                });
                if !on_boundary {
                    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                    total += (s1 - s0) * len;
                }
            }
            Ok(total)
        }
    }
}

/// Parameter range of `p + s(q - p)`, `s ∈ [0, 1]`, inside the box.
fn clip_segment(p: [f64; 2], q: [f64; 2], bounds: &[(f64, f64)]) -> Option<(f64, f64)> {
    let (mut s0, mut s1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        let d = q[k] - p[k];
        let (lo, hi) = bounds[k];
        if d == 0.0 {
            if p[k] < lo || p[k] > hi {
                return None;
            }
            continue;
        }
        let (a, b) = ((lo - p[k]) / d, (hi - p[k]) / d);
        s0 = s0.max(a.min(b));
        s1 = s1.min(a.max(b));
    }
    (s1 > s0).then_some((s0, s1))
}

/// Length (2D) or count (1D) of the zero level set of a sampled field, by
/// linear interpolation between grid points. The field is extended by its
/// edge values up to the box boundary.
pub fn measure_interface(field: &ScalarField) -> Result<f64> {
    let grid = field.grid();
    let v = field.values();
    match grid.dim() {
        1 => Ok(v.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count() as f64),
        2 => {
            let ax: Vec<Vec<f64>> = (0..2)
                .map(|k| {
                    let a = grid.axis(k);
                    let mut c = vec![a.origin];
                    c.extend(a.coords());
                    c.push(a.end());
                    c
                })
                .collect();
            let (n0, n1) = (grid.shape()[0], grid.shape()[1]);
            let val = |i: usize, j: usize| {
                let (a, b) = (i.saturating_sub(1).min(n0 - 1), j.saturating_sub(1).min(n1 - 1));
                v[a * n1 + b]
            };
            let mut total = 0.0;
            for i in 0..n0 + 1 {
                for j in 0..n1 + 1 {
                    let corners = [
                        ([ax[0][i], ax[1][j]], val(i, j)),
                        ([ax[0][i + 1], ax[1][j]], val(i + 1, j)),
                        ([ax[0][i + 1], ax[1][j + 1]], val(i + 1, j + 1)),
                        ([ax[0][i], ax[1][j + 1]], val(i, j + 1)),
                    ];
                    let mut pts = Vec::with_capacity(4);
                    for e in 0..4 {
                        let (pa, va) = corners[e];
                        let (pb, vb) = corners[(e + 1) % 4];
                        if (va > 0.0) != (vb > 0.0) {
                            let s = va / (va - vb);
                            pts.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
                        }
                    }
                    let seg = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    match pts.len() {
                        2 => total += seg(pts[0], pts[1]),
                        4 => {
                            // saddle: pair crossings according to the cell average
                            let centre: f64 = corners.iter().map(|c| c.1).sum::<f64>() / 4.0;
                            let first_positive = corners[0].1 > 0.0;
                            if (centre > 0.0) == first_positive {
                                total += seg(pts[0], pts[1]) + seg(pts[2], pts[3]);
                            } else {
                                total += seg(pts[0], pts[3]) + seg(pts[1], pts[2]);
                            }
                        }
                        _ => {}
                    }
                }
            }
            Ok(total)
        }
        d => Err(Error::InvalidParameter(format!("interface measurement supports d <= 2, got {d}"))),
    }
}
