use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::Grid;
use crate::error::{Error, Result};

/// Real values sampled at the grid points, row-major.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Coefficients with respect to the grid's orthonormal basis.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values produced by our own operators.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn transform(&self) -> SpectralField {
        let mut coeffs = self.values.clone();
        self.grid.forward_in_place(&mut coeffs);
        SpectralField { grid: self.grid.clone(), coeffs }
    }

    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_grid(other)?;
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(self.grid.cell_volume() * dot)
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / self.grid.volume()
    }

    /// Integral over the grid points lying in `region`.
    pub fn integrate_over(&self, region: &Region) -> Result<f64> {
        let mask = region.mask(&self.grid)?;
        let s: f64 = self.values.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v).sum();
        Ok(self.grid.cell_volume() * s)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &ScalarField) -> Result<ScalarField> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    pub(crate) fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl SpectralField {
    pub fn new(grid: Arc<Grid>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidField(format!("expected {} coefficients, got {}", grid.len(), coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_raw(grid: Arc<Grid>, coeffs: Vec<f64>) -> Self {
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn inverse(&self) -> ScalarField {
        let mut values = self.coeffs.clone();
        self.grid.inverse_in_place(&mut values);
        ScalarField::from_raw(self.grid.clone(), values)
    }

    /// Multiplies each coefficient by `f(λ_k²)`.
    pub fn apply_symbol<F: Fn(f64) -> f64>(&self, f: F) -> SpectralField {
        let coeffs = self.coeffs.iter().zip(self.grid.eigenvalues()).map(|(c, &l2)| c * f(l2)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// `Σ c_k²`, equal to `∫ u²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Evaluates the series at an arbitrary point of the box.
    pub fn evaluate_at(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let tables: Vec<Vec<f64>> =
            g.axes().iter().zip(x).map(|(a, &xi)| (0..a.n).map(|k| a.basis_value(k, xi)).collect()).collect();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(flat, c)| {
                let k = g.multi_index(flat);
                c * k.iter().enumerate().map(|(ax, &i)| tables[ax][i]).product::<f64>()
            })
            .sum()
    }
}

/// Axis-aligned sub-box used to restrict integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter(format!("degenerate region {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub(crate) fn mask(&self, grid: &Grid) -> Result<Vec<bool>> {
        if self.lo.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "region has dimension {}, grid has {}",
                self.lo.len(),
                grid.dim()
            )));
        }
        Ok((0..grid.len()).map(|i| self.contains(&grid.point(i))).collect())
    }
}

/// Random band-limited field: coefficients with `λ_k ≤ lambda_max` are drawn
/// uniformly from `[-1, 1]` and damped by `1 / (1 + λ_k²)`, then the field is
/// rescaled so that its largest absolute value equals `amplitude`.
pub fn random_smooth_field<R: Rng + ?Sized>(
    grid: &Arc<Grid>,
    lambda_max: f64,
    amplitude: f64,
    rng: &mut R,
) -> ScalarField {
    let coeffs: Vec<f64> = grid
        .eigenvalues()
        .iter()
        .map(|&l2| if l2 <= lambda_max * lambda_max { rng.random_range(-1.0..=1.0) / (1.0 + l2) } else { 0.0 })
        .collect();
    let f = SpectralField::from_raw(grid.clone(), coeffs).inverse();
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(amplitude / m)
    } else {
        f
    }
}
