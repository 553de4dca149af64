//! Rectangular grids carrying a spectral basis that diagonalizes `-Δ`.
//!
//! Each axis is either [`Boundary::Neumann`] (cell-centred points, cosine
//! basis, `λ_k = πk/ℓ`) or [`Boundary::Periodic`] (odd point count, real
//! Fourier basis, `λ = 2πm/ℓ` for the pair `cos_m, sin_m`). Coefficients are
//! taken against the orthonormal basis, and the quadrature is the plain cell
//! rule, under which discrete orthonormality is exact.

mod field;
pub mod io;
mod transform;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use field::{random_smooth_field, Region, ScalarField, SpectralField};
pub(crate) use transform::for_each_lane;
use transform::AxisTransform;

use crate::error::{Error, Result};

/// Boundary condition on one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Neumann,
    Periodic,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Neumann => "neumann",
            Boundary::Periodic => "periodic",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neumann" => Ok(Boundary::Neumann),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidGrid(format!("unknown boundary kind `{other}`"))),
        }
    }
}

/// One axis of a rectangular grid: the interval `[origin, origin + length]`
/// sampled with `n` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub length: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl Axis {
    /// Axis centred at zero, e.g. `Axis::centered(2.0, 64, Neumann)` is `(-1, 1)`.
    pub fn centered(length: f64, n: usize, boundary: Boundary) -> Self {
        Self { origin: -0.5 * length, length, n, boundary }
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn end(&self) -> f64 {
        self.origin + self.length
    }

    /// Coordinate of grid point `j`.
    pub fn coord(&self, j: usize) -> f64 {
        let h = self.spacing();
        match self.boundary {
            Boundary::Neumann => self.origin + (j as f64 + 0.5) * h,
            Boundary::Periodic => self.origin + j as f64 * h,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coord(j)).collect()
    }

    /// One-dimensional eigenvalue factor `λ` of basis index `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        match self.boundary {
            Boundary::Neumann => PI * k as f64 / self.length,
            Boundary::Periodic => 2.0 * PI * k.div_ceil(2) as f64 / self.length,
        }
    }

    /// Basis index whose eigenfunction is `cos(λ (x - origin))` with the given
    /// `λ`, if `λ` belongs to this axis' spectrum.
    pub fn cosine_index(&self, lambda: f64) -> Option<usize> {
        let unit = match self.boundary {
            Boundary::Neumann => PI / self.length,
            Boundary::Periodic => 2.0 * PI / self.length,
        };
        let m = lambda / unit;
        let mr = m.round();
        if mr < 0.0 || (m - mr).abs() > 1e-9 * m.abs().max(1.0) {
            return None;
        }
        let m = mr as usize;
        let k = match self.boundary {
            Boundary::Neumann => m,
            Boundary::Periodic if m == 0 => 0,
            Boundary::Periodic => 2 * m - 1,
        };
        (k < self.n).then_some(k)
    }

    /// Value at `x` of the orthonormal basis function `k`.
    pub fn basis_value(&self, k: usize, x: f64) -> f64 {
        let t = x - self.origin;
        if k == 0 {
            return (1.0 / self.length).sqrt();
        }
        let w = (2.0 / self.length).sqrt();
        let lam = self.wavenumber(k);
        match self.boundary {
            Boundary::Neumann => w * (lam * t).cos(),
            Boundary::Periodic if k % 2 == 1 => w * (lam * t).cos(),
            Boundary::Periodic => w * (lam * t).sin(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!("axis length must be positive, got {}", self.length)));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidGrid("axis origin must be finite".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 points per axis, got {}", self.n)));
        }
        if self.boundary == Boundary::Periodic && self.n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("periodic axes need an odd point count, got {}", self.n)));
        }
        Ok(())
    }
}

/// A rectangular grid in 1, 2 or 3 dimensions with its spectral basis.
pub struct Grid {
    axes: Vec<Axis>,
    shape: Vec<usize>,
    transforms: Vec<AxisTransform>,
    wavenumbers: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("axes", &self.axes).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

/// Builds a grid with every axis sharing one boundary kind. Axes are centred
/// at the origin, so an extent of 2 gives the interval `(-1, 1)`.
pub fn make_grid(d: usize, extents: &[f64], n: &[usize], boundary: Boundary) -> Result<Arc<Grid>> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    if extents.len() != d || n.len() != d {
        return Err(Error::InvalidGrid(format!(
            "expected {d} extents and point counts, got {} and {}",
            extents.len(),
            n.len()
        )));
    }
    let axes = extents.iter().zip(n).map(|(&l, &k)| Axis::centered(l, k, boundary)).collect();
    Grid::new(axes)
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Arc<Grid>> {
        if !(1..=3).contains(&axes.len()) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {}", axes.len())));
        }
        for a in &axes {
            a.validate()?;
        }
        let shape: Vec<usize> = axes.iter().map(|a| a.n).collect();
        let transforms = axes.iter().map(|a| AxisTransform::new(a.n, a.length, a.boundary)).collect();
        let wavenumbers: Vec<Vec<f64>> = axes.iter().map(|a| (0..a.n).map(|k| a.wavenumber(k)).collect()).collect();
        let total: usize = shape.iter().product();
        let mut eigenvalues = vec![0.0; total];
        for (flat, e) in eigenvalues.iter_mut().enumerate() {
            let mut rem = flat;
            let mut acc = 0.0;
            for ax in (0..shape.len()).rev() {
                let k = rem % shape[ax];
                rem /= shape[ax];
                acc += wavenumbers[ax][k] * wavenumbers[ax][k];
            }
            *e = acc;
        }
        Ok(Arc::new(Grid { axes, shape, transforms, wavenumbers, eigenvalues }))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Boundary kind shared by all axes, or `None` for mixed grids.
    pub fn uniform_boundary(&self) -> Option<Boundary> {
        let b = self.axes[0].boundary;
        self.axes.iter().all(|a| a.boundary == b).then_some(b)
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length).product()
    }

    /// Per-axis 1D eigenvalue factors `λ` indexed by basis index.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Flat table of `λ_k²`, same layout as the coefficient arrays.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: &[usize]) -> f64 {
        self.eigenvalues[self.flat_index(k)]
    }

    pub fn flat_index(&self, k: &[usize]) -> usize {
        debug_assert_eq!(k.len(), self.dim());
        k.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            out[ax] = flat % self.shape[ax];
            flat /= self.shape[ax];
        }
        out
    }

    /// Coordinates of the point with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&j, a)| a.coord(j)).collect()
    }

    /// Values of the orthonormal basis function with multi-index `k` on the grid.
    pub fn basis_function(self: &Arc<Self>, k: &[usize]) -> Result<ScalarField> {
        if k.len() != self.dim() || k.iter().zip(&self.shape).any(|(&i, &n)| i >= n) {
            return Err(Error::InvalidParameter(format!("basis index {k:?} out of range")));
        }
        let mut coeffs = vec![0.0; self.len()];
        coeffs[self.flat_index(k)] = 1.0;
        Ok(SpectralField::new(self.clone(), coeffs)?.inverse())
    }

    pub(crate) fn forward_in_place(&self, data: &mut [f64]) {
        for ax in 0..self.dim() {
            let t = &self.transforms[ax];
            for_each_lane(data, &self.shape, ax, |lane| t.analyze(lane));
        }
    }

    pub(crate) fn inverse_in_place(&self, data: &mut [f64]) {
        for ax in 0..self.dim() {
            let t = &self.transforms[ax];
            for_each_lane(data, &self.shape, ax, |lane| t.synthesize_even(lane));
        }
    }

    /// Grid values of `∂^orders` applied to the function with coefficients
    /// `coeffs`. Odd orders on Neumann axes are synthesised in the sine family.
    pub(crate) fn derivative_values(&self, coeffs: &[f64], orders: &[usize]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        for (ax, &o) in orders.iter().enumerate().take(self.dim()) {
            let lam = &self.wavenumbers[ax];
            let t = &self.transforms[ax];
            match self.axes[ax].boundary {
                Boundary::Neumann => {
                    let sign = match o % 4 {
                        0 | 3 => 1.0,
                        _ => -1.0,
                    };
                    for_each_lane(&mut data, &self.shape, ax, |lane| {
                        if o > 0 {
                            for (c, &l) in lane.iter_mut().zip(lam) {
                                *c *= sign * l.powi(o as i32);
                            }
                        }
                        if o.is_multiple_of(2) {
                            t.synthesize_even(lane);
                        } else {
                            t.synthesize_odd(lane);
                        }
                    });
                }
                Boundary::Periodic => {
                    for_each_lane(&mut data, &self.shape, ax, |lane| {
                        lane[0] *= if o == 0 { 1.0 } else { 0.0 };
                        for _ in 0..o {
                            for m in (1..lane.len()).step_by(2) {
                                let l = lam[m];
                                let (a, b) = (lane[m], lane[m + 1]);
                                lane[m] = l * b;
                                lane[m + 1] = -l * a;
                            }
                        }
                        t.synthesize_even(lane);
                    });
                }
            }
        }
        data
    }
}
