//! Double-well potentials and empirical estimates of their structural
//! constants.
//!
//! The default [`Potential::quartic_truncated`] is `(1 - s²)²` on `|s| ≤ s₀`
//! continued by the C² quadratic `c₂(|s| - m)² + c₀`, so that it has bounded
//! second derivative and quadratic growth. The physical Landau quartic
//! `f(s) = (a₂/2)s² + (a₄/4)s⁴` is available both shifted to vanish at its
//! wells and unshifted.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied potential given by its value and first two derivatives.
#[derive(Clone)]
pub struct CustomPotential {
    pub name: String,
    pub w: ScalarFn,
    pub w1: ScalarFn,
    pub w2: ScalarFn,
}

#[derive(Clone)]
pub enum PotentialKind {
    /// `(1 - s²)²` with a C² quadratic continuation beyond `|s| = s0`.
    QuarticTruncated {
        s0: f64,
        c2: f64,
        m: f64,
        c0: f64,
    },
    /// `scale * (f(s) - shift)` with the Landau quartic `f`.
    PhysicalQuartic {
        a2: f64,
        a4: f64,
        scale: f64,
        shift: f64,
    },
    Custom(CustomPotential),
}

#[derive(Clone)]
pub struct Potential {
    kind: PotentialKind,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PotentialKind::QuarticTruncated { s0, .. } => {
                write!(f, "Potential::QuarticTruncated {{ s0: {s0} }}")
            }
            PotentialKind::PhysicalQuartic { a2, a4, scale, shift } => {
                write!(f, "Potential::PhysicalQuartic {{ a2: {a2:e}, a4: {a4:e}, scale: {scale:e}, shift: {shift:e} }}")
            }
            PotentialKind::Custom(c) => write!(f, "Potential::Custom({})", c.name),
        }
    }
}

/// Landau quartic `f(s) = (a₂/2)s² + (a₄/4)s⁴`.
pub fn physical_f(s: f64, a2: f64, a4: f64) -> f64 {
    let s2 = s * s;
    0.5 * a2 * s2 + 0.25 * a4 * s2 * s2
}

impl Potential {
    /// Default potential with crossover `s0 = 2`.
    pub fn standard() -> Self {
        Self::quartic_truncated(2.0).expect("s0 = 2 is admissible")
    }

    pub fn quartic_truncated(s0: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 > 1.0) {
            return Err(Error::InvalidParameter(format!("crossover s0 must exceed 1, got {s0}")));
        }
        let w = (1.0 - s0 * s0).powi(2);
        let w1 = 4.0 * s0 * (s0 * s0 - 1.0);
        let w2 = 12.0 * s0 * s0 - 4.0;
        let c2 = 0.5 * w2;
        let m = s0 - w1 / w2;
        let c0 = w - c2 * (s0 - m).powi(2);
        if c0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("crossover s0 = {s0} gives a non-positive tail")));
        }
        Ok(Self { kind: PotentialKind::QuarticTruncated { s0, c2, m, c0 } })
    }

    /// Pure `(1 - s²)²`, i.e. the Landau quartic with `a₂ = -a₄` scaled to
    /// unit height. Its second derivative is unbounded.
    pub fn quartic() -> Self {
        Self { kind: PotentialKind::PhysicalQuartic { a2: -4.0, a4: 4.0, scale: 1.0, shift: -1.0 } }
    }

    /// `W = (2κ/Λ²)(f - min f)`, which vanishes at the wells `±√(-a₂/a₄)`.
    pub fn to_w(a2: f64, a4: f64, kappa: f64, lambda: f64) -> Result<Self> {
        let scale = physical_scale(a2, a4, kappa, lambda)?;
        let shift = -a2 * a2 / (4.0 * a4);
        Ok(Self { kind: PotentialKind::PhysicalQuartic { a2, a4, scale, shift } })
    }

    /// `W = (2κ/Λ²) f` without the shift, so that `W(0) = 0`.
    pub fn to_w_unshifted(a2: f64, a4: f64, kappa: f64, lambda: f64) -> Result<Self> {
        let scale = physical_scale(a2, a4, kappa, lambda)?;
        Ok(Self { kind: PotentialKind::PhysicalQuartic { a2, a4, scale, shift: 0.0 } })
    }

    pub fn custom(custom: CustomPotential) -> Self {
        Self { kind: PotentialKind::Custom(custom) }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Crossover where the quadratic tail begins, if any.
    pub fn crossover(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::QuarticTruncated { s0, .. } => Some(s0),
            _ => None,
        }
    }

    /// Location `s > 0` of the right well.
    pub fn well(&self) -> f64 {
        match &self.kind {
            PotentialKind::PhysicalQuartic { a2, a4, .. } => (-a2 / a4).sqrt(),
            _ => 1.0,
        }
    }

    pub fn w(&self, s: f64) -> f64 {
        match &self.kind {
            PotentialKind::QuarticTruncated { s0, c2, m, c0 } => {
                let a = s.abs();
                if a <= *s0 {
                    (1.0 - s * s).powi(2)
                } else {
                    c2 * (a - m).powi(2) + c0
                }
            }
            PotentialKind::PhysicalQuartic { a2, a4, scale, shift } => scale * (physical_f(s, *a2, *a4) - shift),
            PotentialKind::Custom(c) => (c.w)(s),
        }
    }

    pub fn w1(&self, s: f64) -> f64 {
        match &self.kind {
            PotentialKind::QuarticTruncated { s0, c2, m, .. } => {
                let a = s.abs();
                if a <= *s0 {
                    -4.0 * s * (1.0 - s * s)
                } else {
                    2.0 * c2 * (a - m) * s.signum()
                }
            }
            PotentialKind::PhysicalQuartic { a2, a4, scale, .. } => scale * (a2 * s + a4 * s * s * s),
            PotentialKind::Custom(c) => (c.w1)(s),
        }
    }

    pub fn w2(&self, s: f64) -> f64 {
        match &self.kind {
            PotentialKind::QuarticTruncated { s0, c2, .. } => {
                if s.abs() <= *s0 {
                    12.0 * s * s - 4.0
                } else {
                    2.0 * c2
                }
            }
            PotentialKind::PhysicalQuartic { a2, a4, scale, .. } => scale * (a2 + 3.0 * a4 * s * s),
            PotentialKind::Custom(c) => (c.w2)(s),
        }
    }

    /// `∫_{-1}^{1} √W`, by composite Gauss–Legendre quadrature between the wells.
    pub fn sqrt_w_integral(&self) -> f64 {
        let a = self.well();
        crate::quadrature::gauss_legendre(|s| self.w(s).max(0.0).sqrt(), -a, a, 64)
    }

    /// Values at infinity of `W/s²`, `|W'|/√W` and `|W''|`, where known.
    fn tail_limits(&self) -> Option<(f64, f64, f64)> {
        match &self.kind {
            PotentialKind::QuarticTruncated { c2, .. } => Some((*c2, 2.0 * c2.sqrt(), 2.0 * c2)),
            PotentialKind::PhysicalQuartic { .. } => Some((f64::INFINITY, f64::INFINITY, f64::INFINITY)),
            PotentialKind::Custom(_) => None,
        }
    }
}

fn physical_scale(a2: f64, a4: f64, kappa: f64, lambda: f64) -> Result<f64> {
    if !(a4 > 0.0) {
        return Err(Error::InvalidParameter(format!("a4 must be positive, got {a4}")));
    }
    if a2 >= 0.0 {
        return Err(Error::InvalidParameter(format!("a2 = {a2} is not negative, so f has no double well")));
    }
    if !(kappa > 0.0) || lambda == 0.0 {
        return Err(Error::InvalidParameter("kappa must be positive and Lambda nonzero".into()));
    }
    Ok(2.0 * kappa / (lambda * lambda))
}

/// Empirical estimates of the structural constants of a double well.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralConstants {
    /// `inf W(s)/(s ∓ 1)²` on `±s ≥ 0`.
    pub c_w: f64,
    /// `sup |W'|/√W`.
    pub big_c_w: f64,
    /// `sup |W''|`.
    pub k_w: f64,
    /// Largest `|W|` found at the wells.
    pub well_residual: f64,
    /// Smallest `W` found at least `0.05` away from both wells.
    pub min_off_well: f64,
    /// Human-readable descriptions of violated conditions.
    pub violations: Vec<String>,
}

impl StructuralConstants {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Estimates `c_w`, `C_w` and `K_w` on a dense grid over `[-10 s₀, 10 s₀]`
/// (`s₀ = 2` when the potential has no crossover), combined with the exact
/// tail limits where they are known.
pub fn estimate_constants(p: &Potential) -> StructuralConstants {
    let s0 = p.crossover().unwrap_or(2.0);
    let a = p.well();
    let reach = 10.0 * s0 * a;
    let steps = 400_000usize;
    let h = 2.0 * reach / steps as f64;
    let mut c_w = f64::INFINITY;
    let mut big_c = 0.0f64;
    let mut k_w = 0.0f64;
    let mut min_off = f64::INFINITY;
    for i in 0..=steps {
        // offset keeps the samples off the wells themselves
        let s = -reach + (i as f64 + 0.5 * std::f64::consts::FRAC_1_PI) * h;
        if s > reach {
            break;
        }
        let w = p.w(s);
        let well = if s >= 0.0 { a } else { -a };
        let d2 = (s - well).powi(2);
        if d2 > 0.0 {
            c_w = c_w.min(w / d2);
        }
        if w > 0.0 {
            big_c = big_c.max(p.w1(s).abs() / w.sqrt());
        }
        k_w = k_w.max(p.w2(s).abs());
        if (s.abs() - a).abs() > 0.05 {
            min_off = min_off.min(w);
        }
    }
    let well_residual = p.w(a).abs().max(p.w(-a).abs());
    let mut violations = Vec::new();
    match p.tail_limits() {
        Some((cw_inf, cc_inf, kw_inf)) => {
            c_w = c_w.min(cw_inf);
            big_c = big_c.max(cc_inf);
            k_w = k_w.max(kw_inf);
        }
        None => violations.push("tail behaviour unknown; constants cover the sampled range only".into()),
    }
    let scale = p.w(0.0).abs().max(1e-300);
    if well_residual > 1e-12 * scale {
        violations.push(format!("W does not vanish at the wells (|W| = {well_residual:e})"));
    }
    if !(min_off > 0.0) {
        violations.push("W is not positive away from the wells".into());
    }
    if !(c_w > 0.0) {
        violations.push(format!("c_w degenerates ({c_w:e})"));
    }
    if !big_c.is_finite() {
        violations.push("C_w is unbounded (|W'|/sqrt(W) grows without bound)".into());
    }
    if !k_w.is_finite() {
        violations.push("K_w is unbounded (W'' grows without bound)".into());
    }
    StructuralConstants { c_w, big_c_w: big_c, k_w, well_residual, min_off_well: min_off, violations }
}
