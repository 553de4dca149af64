//! Spectral differential operators and the Helmholtz resolvent
//! `(1 - ε²Δ)⁻¹` with Neumann (or periodic) conditions.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SpectralField};

impl SpectralField {
    /// Grid values of the mixed partial derivative `∂^orders`.
    pub fn derivative(&self, orders: &[usize]) -> ScalarField {
        assert_eq!(orders.len(), self.grid().dim(), "one order per axis");
        let values = self.grid().derivative_values(self.coeffs(), orders);
        ScalarField::from_raw(self.grid().clone(), values)
    }

    /// Spectral Laplacian, kept in coefficient space.
    pub fn laplacian(&self) -> SpectralField {
        self.apply_symbol(|l2| -l2)
    }

    /// Components of the gradient.
    pub fn gradient(&self) -> Vec<ScalarField> {
        let d = self.grid().dim();
        (0..d).map(|i| self.derivative(&unit(d, i, 1))).collect()
    }
}

fn unit(d: usize, i: usize, order: usize) -> Vec<usize> {
    let mut o = vec![0; d];
    o[i] = order;
    o
}

fn sum_of_squares(parts: &[ScalarField]) -> ScalarField {
    let mut out = vec![0.0; parts[0].values().len()];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p.values()) {
            *o += v * v;
        }
    }
    ScalarField::from_raw(parts[0].grid().clone(), out)
}

pub fn laplacian(u: &ScalarField) -> ScalarField {
    u.transform().laplacian().inverse()
}

/// Pointwise `|∇u|²`.
pub fn gradient_sq(u: &ScalarField) -> ScalarField {
    sum_of_squares(&u.transform().gradient())
}

/// Pointwise `|∇Δu|²`.
pub fn grad_laplacian_sq(u: &ScalarField) -> ScalarField {
    sum_of_squares(&u.transform().laplacian().gradient())
}

/// Pointwise `|∇²u|² = Σ_ij (∂_i ∂_j u)²`.
pub fn hessian_sq(u: &ScalarField) -> ScalarField {
    let s = u.transform();
    let d = s.grid().dim();
    let mut parts = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in i..d {
            let mut o = vec![0; d];
            o[i] += 1;
            o[j] += 1;
            let p = s.derivative(&o);
            // off-diagonal entries appear twice in the sum
            parts.push(if i == j { p } else { p.scale(std::f64::consts::SQRT_2) });
        }
    }
    sum_of_squares(&parts)
}

/// Multiplier `1 / (1 + ε² λ²)` of the resolvent.
pub fn resolvent_symbol(eps: f64, lambda_sq: f64) -> f64 {
    1.0 / (1.0 + eps * eps * lambda_sq)
}

/// Solves `-ε²Δv + v = u` with the grid's boundary conditions.
pub fn helmholtz_inverse(u: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_eps(eps)?;
    Ok(u.transform().apply_symbol(|l2| resolvent_symbol(eps, l2)).inverse())
}

/// Applies `1 - ε²Δ`.
pub fn helmholtz(v: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_eps(eps)?;
    Ok(v.transform().apply_symbol(|l2| 1.0 + eps * eps * l2).inverse())
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")))
    }
}

/// Smallest `C` with `‖∇²v‖² ≤ 3‖Δv‖² + C‖v‖²` over the sample, clamped at 0.
pub fn elliptic_constant(fields: &[ScalarField]) -> f64 {
    fields
        .iter()
        .map(|v| {
            let h = hessian_sq(v).integrate();
            let l = laplacian(v).norm_l2().powi(2);
            let n = v.norm_l2().powi(2);
            if n > 0.0 {
                (h - 3.0 * l) / n
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Weights `w` with `f'(0) ≈ Σ w_j f(x_j)` for the nodes `x_j`, from the
/// derivative of the Lagrange interpolant.
fn one_sided_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            let xi = nodes[i];
            let denom: f64 = nodes.iter().enumerate().filter(|&(m, _)| m != i).map(|(_, &xm)| xi - xm).product();
            let mut num = 0.0;
            for k in 0..nodes.len() {
                if k == i {
                    continue;
                }
                let prod: f64 =
                    nodes.iter().enumerate().filter(|&(m, _)| m != i && m != k).map(|(_, &xm)| -xm).product();
                num += prod;
            }
            num / denom
        })
        .collect()
}

/// Largest normal derivative of `v` on the box boundary, extrapolated from
/// the grid values next to each wall with one-sided stencils of four to six
/// points. Each estimate is reduced by the spread between the stencils, so
/// that under-resolved data near a wall is not mistaken for a flux. Periodic
/// axes are skipped.
pub fn boundary_flux(v: &ScalarField) -> f64 {
    let g = v.grid();
    let shape = g.shape();
    let vals = v.values();
    let mut worst: f64 = 0.0;
    for (ax, axis) in g.axes().iter().enumerate() {
        if axis.boundary != crate::grid::Boundary::Neumann {
            continue;
        }
        let n = shape[ax];
        let stride: usize = shape[ax + 1..].iter().product();
        let h = axis.spacing();
        // cell-centred points sit half a cell inside the wall
        let stencils: Vec<Vec<f64>> = (n.min(4)..=n.min(6))
            .map(|m| one_sided_weights(&(0..m).map(|j| (j as f64 + 0.5) * h).collect::<Vec<_>>()))
            .collect();
        let outer = vals.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let at = |k: usize| vals[o * n * stride + s + k * stride];
                for wall in [false, true] {
                    let est: Vec<f64> = stencils
                        .iter()
                        .map(|w| w.iter().enumerate().map(|(j, wj)| wj * at(if wall { n - 1 - j } else { j })).sum())
                        .collect();
                    let best = est[est.len() - 1];
                    let spread = est.iter().map(|e| (e - best).abs()).fold(0.0, f64::max);
                    worst = worst.max(best.abs() - spread);
                }
            }
        }
    }
    worst
}
