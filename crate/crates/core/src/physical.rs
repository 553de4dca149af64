//! The coupled composition/height model and its reduction to `F*_ε`.
//!
//! On the rescaled domain `Ω = D/L`,
//!
//! ```text
//! E/L^d = ∫ f(u) + b/(2L²)|∇u|² + σ/(2L²)|∇h|² + κ/(2L⁴)(Δh)² + (Λ/L²) u Δh
//! ```
//!
//! with `f(s) = (a₂/2)s² + (a₄/4)s⁴`. Minimizing over `h` mode by mode gives
//! `h_j = Λu_j/(σ + (κ/L²)λ_j²)`, and with `ε = √(κ/(L²σ))`,
//! `q = 1 - bσ/Λ²`, `W = (2κ/Λ²)f` one gets `(1/ε)(2κ/Λ²)E/L^d = F*_ε[u]`.
//! The constant mode of `h` is undetermined; it is set to zero.

use crate::energy::{f_star, EnergyBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::operators;
use crate::potential::{physical_f, Potential};

/// Physical parameters in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// J/m², negative for phase separation.
    pub a2: f64,
    /// J/m².
    pub a4: f64,
    /// Line tension, J.
    pub b: f64,
    /// Surface tension, J/m².
    pub sigma: f64,
    /// Bending rigidity, J.
    pub kappa: f64,
    /// Composition-curvature coupling, J/m.
    pub lambda: f64,
    /// Domain length scale, m.
    pub length: f64,
}

/// Surface tension range of the characteristic parameter table, J/m².
pub const TABLE1_SIGMA_RANGE: (f64, f64) = (5e-6, 1e-4);

impl PhysicalParams {
    /// Characteristic values (Komura et al., Langmuir 2006) at the given
    /// surface tension, on a 10 μm domain with `a₂ = -a₄`.
    pub fn table1(sigma: f64) -> Self {
        Self { a2: -1e-5, a4: 1e-5, b: 5e-19, sigma, kappa: 1e-19, lambda: 4.9e-12, length: 1e-5 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive =
            [("a4", self.a4), ("b", self.b), ("sigma", self.sigma), ("kappa", self.kappa), ("length", self.length)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.a2.is_finite() && self.a2 < 0.0) {
            return Err(Error::InvalidParameter(format!("a2 must be negative, got {}", self.a2)));
        }
        if !(self.lambda.is_finite() && self.lambda != 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be nonzero, got {}", self.lambda)));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate), and additionally requires `σ` in the
    /// tabulated range.
    pub fn validate_strict(&self) -> Result<()> {
        self.validate()?;
        let (lo, hi) = TABLE1_SIGMA_RANGE;
        if !(self.sigma >= lo && self.sigma <= hi) {
            return Err(Error::InvalidParameter(format!("sigma = {} outside [{lo}, {hi}]", self.sigma)));
        }
        Ok(())
    }

    pub fn f(&self, s: f64) -> f64 {
        physical_f(s, self.a2, self.a4)
    }

    /// `W = (2κ/Λ²) f`, not shifted to vanish at the wells.
    pub fn potential(&self) -> Result<Potential> {
        Potential::to_w_unshifted(self.a2, self.a4, self.kappa, self.lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nondimensional {
    pub eps: f64,
    pub q: f64,
    /// `2κ/Λ²`.
    pub w_scale: f64,
    /// `√(κ/σ)` in metres.
    pub intrinsic_length: f64,
}

pub fn nondimensionalize(p: &PhysicalParams) -> Result<Nondimensional> {
    p.validate()?;
    Ok(Nondimensional {
        eps: (p.kappa / (p.length * p.length * p.sigma)).sqrt(),
        q: 1.0 - p.b * p.sigma / (p.lambda * p.lambda),
        w_scale: 2.0 * p.kappa / (p.lambda * p.lambda),
        intrinsic_length: (p.kappa / p.sigma).sqrt(),
    })
}

fn height_symbol(p: &PhysicalParams, lambda_sq: f64) -> f64 {
    if lambda_sq == 0.0 {
        0.0
    } else {
        p.lambda / (p.sigma + p.kappa / (p.length * p.length) * lambda_sq)
    }
}

/// Height field minimizing the energy for fixed `u`, with zero mean.
pub fn solve_height(u: &ScalarField, p: &PhysicalParams) -> Result<ScalarField> {
    p.validate()?;
    Ok(u.transform().apply_symbol(|l2| height_symbol(p, l2)).inverse())
}

/// Relative residual of `Δ((κ/L⁴)Δh - (σ/L²)h + (Λ/L²)u) = 0`, measured
/// against the size of its three contributions.
pub fn height_residual(u: &ScalarField, h: &ScalarField, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let l2 = p.length * p.length;
    let hs = h.transform();
    let us = u.transform();
    let bending = hs.apply_symbol(|k| p.kappa / (l2 * l2) * k * k);
    let tension = hs.apply_symbol(|k| p.sigma / l2 * k);
    let coupling = us.apply_symbol(|k| -p.lambda / l2 * k);
    let sum: Vec<f64> =
        bending.coeffs().iter().zip(tension.coeffs()).zip(coupling.coeffs()).map(|((a, b), c)| a + b + c).collect();
    let norm = |c: &[f64]| c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(bending.coeffs()) + norm(tension.coeffs()) + norm(coupling.coeffs());
    Ok(if scale > 0.0 { norm(&sum) / scale } else { 0.0 })
}

/// Terms of `E[u, h]/L^d`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhysicalEnergy {
    pub potential: f64,
    pub line_tension: f64,
    pub surface_tension: f64,
    pub bending: f64,
    pub coupling: f64,
    pub total: f64,
}

/// `E[u, h]/L^d`, evaluated in physical space with spectral derivatives.
pub fn full_energy(u: &ScalarField, h: &ScalarField, p: &PhysicalParams) -> Result<PhysicalEnergy> {
    p.validate()?;
    u.check_grid(h)?;
    let l2 = p.length * p.length;
    let lap_h = operators::laplacian(h);
    let potential = u.map(|s| p.f(s)).integrate();
    let line_tension = p.b / (2.0 * l2) * operators::gradient_sq(u).integrate();
    let surface_tension = p.sigma / (2.0 * l2) * operators::gradient_sq(h).integrate();
    let bending = p.kappa / (2.0 * l2 * l2) * lap_h.map(|x| x * x).integrate();
    let coupling = p.lambda / l2 * u.inner(&lap_h)?;
    Ok(PhysicalEnergy {
        potential,
        line_tension,
        surface_tension,
        bending,
        coupling,
        total: potential + line_tension + surface_tension + bending + coupling,
    })
}

/// Relative size of `∫(κ/L²)(Δh)² + σ|∇h|² + ΛuΔh`, which vanishes for the
/// optimal height.
pub fn height_balance(u: &ScalarField, h: &ScalarField, p: &PhysicalParams) -> Result<f64> {
    let e = full_energy(u, h, p)?;
    let l2 = p.length * p.length;
    // each term of the balance is 2L² or L² times an energy term
    let terms = [2.0 * l2 * e.bending, 2.0 * l2 * e.surface_tension, l2 * e.coupling];
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let sum: f64 = terms.iter().sum();
    Ok(if scale > 0.0 { sum.abs() / scale } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    pub nondim: Nondimensional,
    pub physical: PhysicalEnergy,
    /// `(1/ε)(2κ/Λ²) E/L^d`.
    pub scaled_physical: f64,
    pub reduced: EnergyBreakdown,
    pub rel_error: f64,
}

impl ReductionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.rel_error <= tol
    }

    /// Errors with the per-term breakdown when the two sides disagree.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.holds(tol) {
            return Ok(());
        }
        Err(Error::Numerical(format!(
            "reduction mismatch {:.3e} > {tol:.1e}: scaled physical {:.17e} ({:?}) vs reduced {:.17e} ({:?})",
            self.rel_error, self.scaled_physical, self.physical, self.reduced.total, self.reduced
        )))
    }
}

/// Evaluates both sides of `(1/ε)(2κ/Λ²)E[u, h*(u)]/L^d = F*_ε[u]`.
pub fn reduced_equals_full(u: &ScalarField, p: &PhysicalParams) -> Result<ReductionReport> {
    let nd = nondimensionalize(p)?;
    let h = solve_height(u, p)?;
    let physical = full_energy(u, &h, p)?;
    let scaled_physical = nd.w_scale / nd.eps * physical.total;
    let reduced = f_star(u, &EnergyParams::new(nd.eps, nd.q)?, &p.potential()?)?;
    let scale = scaled_physical.abs().max(reduced.total.abs()).max(f64::MIN_POSITIVE);
    let rel_error = (scaled_physical - reduced.total).abs() / scale;
    Ok(ReductionReport { nondim: nd, physical, scaled_physical, reduced, rel_error })
}

/// Long-wavelength energy
/// `E_ap/L^d = ∫ f + (1/(2L²))(b - Λ²/σ)|∇u|² + (Λ²κ/(2L⁴σ²))(Δu)²`.
pub fn longwave_energy(u: &ScalarField, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let l2 = p.length * p.length;
    let lam2 = p.lambda * p.lambda;
    let grad = operators::gradient_sq(u).integrate();
    let lap = operators::laplacian(u).map(|x| x * x).integrate();
    Ok(u.map(|s| p.f(s)).integrate()
        + (p.b - lam2 / p.sigma) / (2.0 * l2) * grad
        + lam2 * p.kappa / (2.0 * l2 * l2 * p.sigma * p.sigma) * lap)
}
