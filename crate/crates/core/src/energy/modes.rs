//! Single-mode energies on `(-1, 1)`.
//!
//! For `u = ψ_n = cos(λ_n x)` with `∫ψ_n² = 1`, the quadratic part of
//! `ε F*` equals `F_{q,n} = -1 + (1-q)ε²λ_n² + 1/(1+ε²λ_n²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeEnergy {
    pub lambda: f64,
    pub f_qn: f64,
    /// Whether the mode lowers the energy of the uniform state.
    pub destabilizing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalMode {
    /// `ε²λ*²`, clamped at zero when the uniform state is stable.
    pub eps2_lambda2: f64,
    pub lambda_sq: f64,
    pub f_star: f64,
}

/// `F_{q,n}` for an arbitrary wavenumber `λ`.
pub fn mode_energy_at(q: f64, eps: f64, lambda: f64) -> ModeEnergy {
    let t = eps * eps * lambda * lambda;
    let f_qn = -1.0 + (1.0 - q) * t + 1.0 / (1.0 + t);
    ModeEnergy { lambda, f_qn, destabilizing: f_qn < 0.0 }
}

/// `F_{q,n}` for `λ_n = 2πn`.
pub fn mode_energy(q: f64, eps: f64, n: u32) -> ModeEnergy {
    mode_energy_at(q, eps, 2.0 * PI * n as f64)
}

/// Minimizer of `F_{q,n}` over continuous `λ`: `ε²λ*² = 1/√(1-q) - 1` with
/// energy `-2 + 2√(1-q) + q`. For `q ≤ 0` the minimum sits at `λ = 0`.
pub fn optimal_mode(q: f64, eps: f64) -> Result<OptimalMode> {
    if q >= 1.0 {
        return Err(Error::UnboundedBelow(format!(
            "q = {q} >= 1: the mode energy decreases without bound in the wavenumber"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if q <= 0.0 {
        return Ok(OptimalMode { eps2_lambda2: 0.0, lambda_sq: 0.0, f_star: 0.0 });
    }
    let r = (1.0 - q).sqrt();
    let t = 1.0 / r - 1.0;
    Ok(OptimalMode { eps2_lambda2: t, lambda_sq: t / (eps * eps), f_star: -2.0 + 2.0 * r + q })
}
