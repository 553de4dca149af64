//! Empirical probes of the interpolation inequality and the lower bound
//! `F_ε[v] ≥ q I_ε[v] - (12q/q*) C ε³ |Ω|`.
//!
//! The constants `q*` and `C` are only known to exist; here they are
//! estimated from sample fields, and every inequality check is a
//! falsification test against those estimates.

use super::{f_v, i_eps, EnergyParams};
use crate::error::Result;
use crate::grid::ScalarField;
use crate::operators;
use crate::potential::{StructuralConstants, Potential};

/// Estimate of the interpolation constant over a corpus of fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationEstimate {
    /// `sup ∫ε|∇v|² / ∫(W(v)/ε + ε³|∇²v|²)` over the corpus.
    pub sup_ratio: f64,
    /// `min(1, 1/sup_ratio)`.
    pub q_star: f64,
}

pub fn interpolation_constant(fields: &[ScalarField], eps: f64, pot: &Potential) -> InterpolationEstimate {
    let sup_ratio = fields
        .iter()
        .map(|v| {
            let num = eps * operators::gradient_sq(v).integrate();
            let den = v.map(|x| pot.w(x)).integrate() / eps + eps.powi(3) * operators::hessian_sq(v).integrate();
            if den > 0.0 {
                num / den
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let q_star = if sup_ratio > 0.0 { (1.0 / sup_ratio).min(1.0) } else { 1.0 };
    InterpolationEstimate { sup_ratio, q_star }
}

/// `q₀ = q*/(2q* + 4K_w + 4C_w² + 10)`.
pub fn lower_bound_q0(q_star: f64, c: &StructuralConstants) -> f64 {
    q_star / (2.0 * q_star + 4.0 * c.k_w + 4.0 * c.big_c_w * c.big_c_w + 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub energy: f64,
    pub i_eps: f64,
    pub rhs: f64,
    /// `energy - rhs`; negative values falsify the bound for the estimates used.
    pub margin: f64,
    pub q_star: f64,
    pub c_omega: f64,
    pub q0: f64,
    /// Whether `q ≤ q0`, the range in which the bound is claimed.
    pub q_admissible: bool,
}

impl LowerBoundReport {
    pub fn holds(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Evaluates both sides of the lower bound for `v` with the supplied
/// estimates of `q*` and the elliptic constant `C(Ω)`.
pub fn lower_bound_check(
    v: &ScalarField,
    p: &EnergyParams,
    pot: &Potential,
    q_star: f64,
    c_omega: f64,
    constants: &StructuralConstants,
) -> Result<LowerBoundReport> {
    let energy = f_v(v, p, pot, None)?.total;
    let i = i_eps(v, p.eps, pot, None)?;
    let volume = v.grid().volume();
    let rhs = p.q * i - 12.0 * p.q / q_star * c_omega * p.eps.powi(3) * volume;
    let q0 = lower_bound_q0(q_star, constants);
    Ok(LowerBoundReport { energy, i_eps: i, rhs, margin: energy - rhs, q_star, c_omega, q0, q_admissible: p.q <= q0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, random_smooth_field, Boundary};
    use crate::potential::estimate_constants;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_bound_is_tight() {
        let g = make_grid(1, &[2.0], &[32], Boundary::Neumann).unwrap();
        let pot = Potential::standard();
        let c = estimate_constants(&pot);
        let p = EnergyParams::new(0.05, 0.001).unwrap();
        let r = lower_bound_check(&ScalarField::constant(g, 1.0), &p, &pot, 0.5, 0.0, &c).unwrap();
        assert!(r.energy.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn q0_for_standard_potential() {
        let c = estimate_constants(&Potential::standard());
        let q0 = lower_bound_q0(1.0, &c);
        assert!((q0 - 1.0 / (2.0 + 176.0 + 352.0 + 10.0)).abs() < 1e-12);
    }

    #[test]
    fn interpolation_ratio_is_finite() {
        let g = make_grid(2, &[1.0, 1.0], &[32, 32], Boundary::Neumann).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fields: Vec<_> = (0..5).map(|_| random_smooth_field(&g, 20.0, 1.5, &mut rng)).collect();
        let est = interpolation_constant(&fields, 0.05, &Potential::standard());
        assert!(est.sup_ratio.is_finite());
        assert!(est.q_star > 0.0 && est.q_star <= 1.0);
    }
}
