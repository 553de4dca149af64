//! Descent on `F*_ε` over `u`: projected `L²` gradient descent with
//! backtracking, and a semi-implicit spectral scheme.
//!
//! The semi-implicit step treats the linear part of the gradient (symbol
//! `L_k`, see [`linear_symbol`]) plus a stabilizing shift `S` implicitly and
//! `W'(u)/ε - S u` explicitly:
//!
//! ```text
//! û'_k = (û_k + dt (S û_k - N̂_k)) / (1 + dt (L_k + S)),   N = W'(u)/ε
//! ```
//!
//! For `q ≤ 0` every `L_k ≥ 0`, so the linear part is stable for every `dt`.
//! For `q > 0` the most negative symbol is `(2/ε)(-2 + 2√(1-q) + q)` and
//! linear stability needs `1 + dt (L_k + S) > 0`. Accepted steps never raise
//! the energy; a step that would is retried with half the time step.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{f_star, f_star_gradient, linear_symbol, EnergyParams};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, SpectralField};
use crate::potential::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    L2Descent,
    SemiImplicitSpectral,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassConstraint {
    None,
    FixedMean(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once the `L²` norm of the (projected) gradient falls below this.
    pub tolerance: f64,
    pub mass: MassConstraint,
    pub seed: u64,
    /// Energy below which the flow is declared divergent. Defaults to
    /// `-10³ |Ω| / ε`.
    pub divergence_floor: Option<f64>,
    /// Stabilizing shift `S`, in units of `1/ε`.
    pub stabilization: f64,
    /// Record every n-th step in the trajectory (the last step is always kept).
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SemiImplicitSpectral,
            dt: 1e-3,
            max_steps: 10_000,
            tolerance: 1e-6,
            mass: MassConstraint::None,
            seed: 0,
            divergence_floor: None,
            stabilization: 4.0,
            record_every: 1,
        }
    }
}

impl FlowConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.stabilization >= 0.0) {
            return Err(Error::InvalidParameter("stabilization must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub mean: f64,
    /// `λ` of the largest non-constant spectral coefficient.
    pub dominant_wavenumber: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub field: ScalarField,
    pub trajectory: Vec<TrajectoryRow>,
    pub status: FlowStatus,
    pub steps: usize,
    pub energy: f64,
}

/// Uniform noise in `[-amplitude, amplitude]` shifted to have mean exactly `mean`.
pub fn random_initial(grid: &Arc<Grid>, mean: f64, amplitude: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    let f = ScalarField::from_raw(grid.clone(), raw);
    let shift = mean - f.mean();
    f.map(|v| v + shift)
}

/// `λ` of the largest non-constant coefficient of `u`.
pub fn dominant_wavenumber(s: &SpectralField) -> f64 {
    let (mut best, mut arg) = (0.0, 0.0);
    for (c, &l2) in s.coeffs().iter().zip(s.grid().eigenvalues()).skip(1) {
        if c.abs() > best {
            best = c.abs();
            arg = l2.sqrt();
        }
    }
    arg
}

fn project_mean(g: &mut ScalarField) {
    let m = g.mean();
    for v in g.values_mut() {
        *v -= m;
    }
}

/// One semi-implicit step; `fixed_mean` freezes the constant mode.
pub fn semi_implicit_step(
    u: &ScalarField,
    dt: f64,
    p: &EnergyParams,
    pot: &Potential,
    stabilization: f64,
    fixed_mean: bool,
) -> ScalarField {
    let s = stabilization / p.eps;
    let us = u.transform();
    let n = u.map(|x| pot.w1(x) / p.eps).transform();
    let coeffs: Vec<f64> = us
        .coeffs()
        .iter()
        .zip(n.coeffs())
        .zip(u.grid().eigenvalues())
        .enumerate()
        .map(|(k, ((&uk, &nk), &l2))| {
            if k == 0 && fixed_mean {
                uk
            } else {
                (uk + dt * (s * uk - nk)) / (1.0 + dt * (linear_symbol(p, l2) + s))
            }
        })
        .collect();
    SpectralField::from_raw(u.grid().clone(), coeffs).inverse()
}

fn gradient(u: &ScalarField, p: &EnergyParams, pot: &Potential, fixed_mean: bool) -> Result<ScalarField> {
    let mut g = f_star_gradient(u, p, pot)?;
    if fixed_mean {
        project_mean(&mut g);
    }
    Ok(g)
}

fn term_magnitude(b: &crate::energy::EnergyBreakdown) -> f64 {
    b.terms().iter().map(|(_, v)| v.abs()).sum::<f64>().max(1e-300)
}

/// Runs the configured descent from `u0`.
pub fn descend(u0: &ScalarField, p: &EnergyParams, pot: &Potential, cfg: &FlowConfig) -> Result<FlowResult> {
    cfg.validate()?;
    let fixed_mean = match cfg.mass {
        MassConstraint::FixedMean(m) => {
            if (u0.mean() - m).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "initial mean {} differs from the fixed mean {m}",
                    u0.mean()
                )));
            }
            true
        }
        MassConstraint::None => false,
    };
    let volume = u0.grid().volume();
    let floor = cfg.divergence_floor.unwrap_or(-1e3 * volume / p.eps);
    let min_dt = cfg.dt * 1e-12;

    let mut u = u0.clone();
    let first = f_star(&u, p, pot)?;
    let mut energy = first.total;
    // rounding level of an energy evaluation
    let mut magnitude = term_magnitude(&first);
    let mut g = gradient(&u, p, pot, fixed_mean)?;
    let mut gnorm = g.norm_l2();
    let mut dt = cfg.dt;
    let record_every = cfg.record_every.max(1);
    let row = |step: usize, u: &ScalarField, energy: f64, gnorm: f64| TrajectoryRow {
        step,
        energy,
        grad_norm: gnorm,
        mean: u.mean(),
        dominant_wavenumber: dominant_wavenumber(&u.transform()),
    };
    let mut trajectory = vec![row(0, &u, energy, gnorm)];
    let mut status = FlowStatus::MaxSteps;
    let mut step = 0;

    while step < cfg.max_steps {
        if gnorm < cfg.tolerance {
            status = FlowStatus::Converged;
            break;
        }
        step += 1;
        loop {
            let candidate = match cfg.scheme {
                Scheme::L2Descent => u.axpy(-dt, &g)?,
                Scheme::SemiImplicitSpectral => semi_implicit_step(&u, dt, p, pot, cfg.stabilization, fixed_mean),
            };
            let (e, mag) = if candidate.values().iter().all(|v| v.is_finite()) {
                let b = f_star(&candidate, p, pot)?;
                (b.total, term_magnitude(&b))
            } else {
                (f64::NAN, 0.0)
            };
            let slack = 1e-13 * magnitude.max(mag);
            let accept = match cfg.scheme {
                Scheme::L2Descent => e <= energy - 1e-4 * dt * gnorm * gnorm + slack,
                Scheme::SemiImplicitSpectral => e <= energy + slack,
            };
            if accept {
                if e < floor {
                    return Err(Error::Diverged { eps: p.eps, q: p.q, energy: e, floor });
                }
                u = candidate;
                energy = e;
                magnitude = mag;
                if cfg.scheme == Scheme::L2Descent {
                    dt = (dt * 1.25).min(cfg.dt * 1e3);
                } else {
                    dt = (dt * 1.25).min(cfg.dt);
                }
                break;
            }
            dt *= 0.5;
            if dt < min_dt {
                return Err(Error::StepUnderflow { step, dt });
            }
        }
        g = gradient(&u, p, pot, fixed_mean)?;
        gnorm = g.norm_l2();
        if step % record_every == 0 {
            trajectory.push(row(step, &u, energy, gnorm));
        }
    }
    if trajectory.last().map(|r| r.step) != Some(step) {
        trajectory.push(row(step, &u, energy, gnorm));
    }
    if status == FlowStatus::MaxSteps && gnorm < cfg.tolerance {
        status = FlowStatus::Converged;
    }
    Ok(FlowResult { field: u, trajectory, status, steps: step, energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Boundary};

    fn grid1() -> Arc<Grid> {
        make_grid(1, &[2.0], &[64], Boundary::Neumann).unwrap()
    }

    #[test]
    fn well_is_a_fixed_point() {
        let g = grid1();
        let u = ScalarField::constant(g, 1.0);
        let p = EnergyParams::new(0.1, 0.1).unwrap();
        let pot = Potential::standard();
        let next = semi_implicit_step(&u, 0.01, &p, &pot, 4.0, false);
        for v in next.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let r = descend(&u, &p, &pot, &FlowConfig::default()).unwrap();
        assert_eq!(r.status, FlowStatus::Converged);
        assert!(r.energy.abs() < 1e-12);
    }

    #[test]
    fn small_step_follows_negative_gradient() {
        let g = grid1();
        let u = ScalarField::from_fn(g, |x| 0.3 * (std::f64::consts::PI * x[0]).cos() + 0.2).unwrap();
        let p = EnergyParams::new(0.2, 0.3).unwrap();
        let pot = Potential::standard();
        let grad = f_star_gradient(&u, &p, &pot).unwrap();
        let rate = |dt: f64| {
            let next = semi_implicit_step(&u, dt, &p, &pot, 0.0, false);
            next.axpy(-1.0, &u).unwrap().scale(1.0 / dt)
        };
        let (r1, r2) = (rate(1e-4), rate(5e-5));
        let extrapolated = r2.scale(2.0).axpy(-1.0, &r1).unwrap();
        let err = extrapolated.axpy(1.0, &grad).unwrap().norm_l2() / grad.norm_l2();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn mean_is_preserved_and_energy_decreases() {
        let g = grid1();
        let u0 = random_initial(&g, 0.2, 0.1, 3);
        let p = EnergyParams::new(0.1, 0.2).unwrap();
        let cfg =
            FlowConfig { mass: MassConstraint::FixedMean(0.2), max_steps: 200, dt: 0.01, ..FlowConfig::default() };
        for scheme in [Scheme::SemiImplicitSpectral, Scheme::L2Descent] {
            let r = descend(&u0, &p, &Potential::standard(), &FlowConfig { scheme, ..cfg.clone() }).unwrap();
            for w in r.trajectory.windows(2) {
                assert!(w[1].energy <= w[0].energy + 1e-12);
                assert!((w[1].mean - 0.2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_mismatched_mean() {
        let g = grid1();
        let u0 = ScalarField::constant(g, 0.5);
        let cfg = FlowConfig { mass: MassConstraint::FixedMean(0.0), ..FlowConfig::default() };
        let p = EnergyParams::new(0.1, 0.1).unwrap();
        assert!(descend(&u0, &p, &Potential::standard(), &cfg).is_err());
    }

    #[test]
    fn unbounded_regime_is_reported() {
        let g = grid1();
        let u0 = random_initial(&g, 0.0, 0.1, 1);
        let p = EnergyParams::new(0.1, 1.5).unwrap();
        let cfg = FlowConfig { dt: 0.01, max_steps: 5000, divergence_floor: Some(-50.0), ..FlowConfig::default() };
        let r = descend(&u0, &p, &Potential::quartic(), &cfg);
        assert!(matches!(r, Err(Error::Diverged { .. })), "{r:?}");
    }
}
