//! Cell problem for the surface energy density `m_d`.
//!
//! Profiles are functions of the normal coordinate `x ∈ [-1/2, 1/2]` only,
//! equal to `+1` on `[-1/2, -1/2 + δ]` and `-1` on `[1/2 - δ, 1/2]`. They are
//! represented by uniform cubic B-splines with `K` intervals, which are C²
//! and so lie in `W^{3,2}`; the energy
//!
//! ```text
//! ∫ (1/ε) W(v - ε²v'') - ε q v'² + (1-2q) ε³ v''² + (1-q) ε⁵ v'''²
//! ```
//!
//! is integrated with a 7-point Gauss rule on every knot interval. Doubling
//! `K` refines the knots, so the admissible sets are nested and the estimate
//! can only go down. Each ε is minimized by damped Newton iterations with a
//! Levenberg shift whenever the Hessian is indefinite.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::legendre_rule;

const GAUSS_POINTS: usize = 7;

/// Cubic B-spline profile on `[-1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellProfile {
    knots: usize,
    clamp: f64,
    coeffs: Vec<f64>,
}

/// Uniform cubic B-spline pieces on one knot interval: `[order][local][·]`
/// evaluated at parameter `t ∈ [0, 1]`, derivatives in units of the knot
/// spacing.
fn local_basis(t: f64) -> [[f64; 4]; 4] {
    let s = 1.0 - t;
    [
        [
            s * s * s / 6.0,
            (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
            (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0,
            t * t * t / 6.0,
        ],
        [-s * s / 2.0, (3.0 * t * t - 4.0 * t) / 2.0, (-3.0 * t * t + 2.0 * t + 1.0) / 2.0, t * t / 2.0],
        [s, 3.0 * t - 2.0, 1.0 - 3.0 * t, t],
        [-1.0, 3.0, -3.0, 1.0],
    ]
}

impl CellProfile {
    fn validate(knots: usize, clamp: f64) -> Result<()> {
        if knots < 8 {
            return Err(Error::InvalidParameter(format!("need at least 8 knot intervals, got {knots}")));
        }
        if !(clamp > 0.0 && clamp < 0.5) {
            return Err(Error::InvalidParameter(format!("clamp width must lie in (0, 1/2), got {clamp}")));
        }
        let p = Self { knots, clamp, coeffs: vec![0.0; knots + 3] };
        if p.free_indices().is_empty() {
            return Err(Error::InvalidParameter("clamp zones leave no free coefficients".into()));
        }
        Ok(())
    }

    /// Smooth monotone start: `-tanh(x/w)` rescaled to reach `±1` at the
    /// clamp zones, with `w = width`.
    pub fn tanh(knots: usize, clamp: f64, width: f64) -> Result<Self> {
        Self::validate(knots, clamp)?;
        let edge = 0.5 - clamp;
        let norm = (edge / width).tanh();
        Ok(Self::from_fn(knots, clamp, |x| -(x / width).tanh() / norm))
    }

    /// Linear ramp from `+1` to `-1` across the free zone.
    pub fn ramp(knots: usize, clamp: f64) -> Result<Self> {
        Self::validate(knots, clamp)?;
        let edge = 0.5 - clamp;
        Ok(Self::from_fn(knots, clamp, |x| -x / edge))
    }

    /// Coefficients taken from `f` at the B-spline centres, clipped to
    /// `[-1, 1]`, with the clamped coefficients set exactly.
    fn from_fn<F: Fn(f64) -> f64>(knots: usize, clamp: f64, f: F) -> Self {
        let h = 1.0 / knots as f64;
        let mut p = Self { knots, clamp, coeffs: vec![0.0; knots + 3] };
        for (idx, c) in p.coeffs.iter_mut().enumerate() {
            let centre = -0.5 + (idx as f64 - 1.0) * h;
            *c = f(centre).clamp(-1.0, 1.0);
        }
        p.apply_clamps();
        p
    }

    pub fn knots(&self) -> usize {
        self.knots
    }

    pub fn clamp_width(&self) -> f64 {
        self.clamp
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn spacing(&self) -> f64 {
        1.0 / self.knots as f64
    }

    fn is_left_fixed(&self, idx: usize) -> bool {
        (idx as f64 - 3.0) * self.spacing() < self.clamp
    }

    fn is_right_fixed(&self, idx: usize) -> bool {
        (idx as f64 + 1.0) * self.spacing() > 1.0 - self.clamp
    }

    fn free_indices(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !self.is_left_fixed(i) && !self.is_right_fixed(i)).collect()
    }

    fn apply_clamps(&mut self) {
        for i in 0..self.coeffs.len() {
            if self.is_left_fixed(i) {
                self.coeffs[i] = 1.0;
            } else if self.is_right_fixed(i) {
                self.coeffs[i] = -1.0;
            }
        }
    }

    /// Value of the `order`-th derivative (`order ≤ 3`) at `x`; outside
    /// `[-1/2, 1/2]` the profile continues by its end values.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        if x <= -0.5 {
            return if order == 0 { 1.0 } else { 0.0 };
        }
        if x >= 0.5 {
            return if order == 0 { -1.0 } else { 0.0 };
        }
        let h = self.spacing();
        let y = (x + 0.5) / h;
        let j = (y.floor() as usize).min(self.knots - 1);
        let b = local_basis(y - j as f64);
        let scale = h.powi(-(order as i32));
        (0..4).map(|r| self.coeffs[j + r] * b[order][r]).sum::<f64>() * scale
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Re-expresses the profile on twice as many knot intervals.
    pub fn refine(&self) -> CellProfile {
        // knot insertion for uniform cubic B-splines
        let n = self.coeffs.len();
        let mut fine = vec![0.0; 2 * self.knots + 3];
        for (k, f) in fine.iter_mut().enumerate() {
            // fine index k corresponds to B-spline starting at fine knot k - 3
            let m = k as isize - 3;
            let c = |i: isize| -> f64 {
                let idx = (i + 3).clamp(0, n as isize - 1) as usize;
                self.coeffs[idx]
            };
            let k = m.div_euclid(2);
            *f = if m.rem_euclid(2) == 0 { (c(k - 2) + 6.0 * c(k - 1) + c(k)) / 8.0 } else { (c(k - 1) + c(k)) / 2.0 };
        }
        CellProfile { knots: 2 * self.knots, clamp: self.clamp, coeffs: fine }
    }
}

/// Per-term cell energies of a profile.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CellEnergy {
    pub potential: f64,
    pub gradient: f64,
    pub laplacian_sq: f64,
    pub grad_laplacian_sq: f64,
    pub total: f64,
}

struct Quadrature {
    weights: Vec<f64>,
    /// `basis[g][order][r]` at Gauss node `g`, in units of the knot spacing.
    basis: Vec<[[f64; 4]; 4]>,
}

impl Quadrature {
    fn new() -> Self {
        let (x, w) = legendre_rule(GAUSS_POINTS);
        let basis = x.iter().map(|&xi| local_basis(0.5 * (xi + 1.0))).collect();
        Self { weights: w.iter().map(|wi| 0.5 * wi).collect(), basis }
    }
}

/// Local jets `(v, v', v'', v''')` and basis derivatives at every quadrature point.
struct Jet<'a> {
    p: &'a CellProfile,
    quad: &'a Quadrature,
}

impl Jet<'_> {
    fn for_each<F: FnMut(usize, f64, [f64; 4], [[f64; 4]; 4])>(&self, mut f: F) {
        let h = self.p.spacing();
        let scales = [1.0, 1.0 / h, 1.0 / (h * h), 1.0 / (h * h * h)];
        for j in 0..self.p.knots {
            for (g, b) in self.quad.basis.iter().enumerate() {
                let mut db = [[0.0; 4]; 4];
                let mut jet = [0.0; 4];
                for k in 0..4 {
                    for r in 0..4 {
                        db[k][r] = b[k][r] * scales[k];
                        jet[k] += self.p.coeffs[j + r] * db[k][r];
                    }
                }
                f(j, self.quad.weights[g] * h, jet, db);
            }
        }
    }
}

/// Energy of a profile at scale `eps`.
pub fn cell_energy(p: &CellProfile, eps: f64, q: f64, pot: &Potential) -> CellEnergy {
    let quad = Quadrature::new();
    cell_energy_with(p, eps, q, pot, &quad)
}

fn cell_energy_with(p: &CellProfile, eps: f64, q: f64, pot: &Potential, quad: &Quadrature) -> CellEnergy {
    let mut e = CellEnergy::default();
    let (e2, e3, e5) = (eps * eps, eps.powi(3), eps.powi(5));
    Jet { p, quad }.for_each(|_, w, v, _| {
        e.potential += w * pot.w(v[0] - e2 * v[2]) / eps;
        e.gradient -= w * eps * q * v[1] * v[1];
        e.laplacian_sq += w * (1.0 - 2.0 * q) * e3 * v[2] * v[2];
        e.grad_laplacian_sq += w * (1.0 - q) * e5 * v[3] * v[3];
    });
    e.total = e.potential + e.gradient + e.laplacian_sq + e.grad_laplacian_sq;
    e
}

/// Gradient and Hessian with respect to all coefficients.
fn derivatives(p: &CellProfile, eps: f64, q: f64, pot: &Potential, quad: &Quadrature) -> (Vec<f64>, DMatrix<f64>) {
    let n = p.coeffs.len();
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    let (e2, e3, e5) = (eps * eps, eps.powi(3), eps.powi(5));
    let c1 = -2.0 * eps * q;
    let c2 = 2.0 * (1.0 - 2.0 * q) * e3;
    let c3 = 2.0 * (1.0 - q) * e5;
    Jet { p, quad }.for_each(|j, w, v, db| {
        let u = v[0] - e2 * v[2];
        let (w1, w2) = (pot.w1(u) / eps, pot.w2(u) / eps);
        let a: [f64; 4] = std::array::from_fn(|r| db[0][r] - e2 * db[2][r]);
        for r in 0..4 {
            grad[j + r] += w * (w1 * a[r] + c1 * v[1] * db[1][r] + c2 * v[2] * db[2][r] + c3 * v[3] * db[3][r]);
            for s in 0..4 {
                hess[(j + r, j + s)] += w
                    * (w2 * a[r] * a[s]
                        + c1 * db[1][r] * db[1][s]
                        + c2 * db[2][r] * db[2][s]
                        + c3 * db[3][r] * db[3][s]);
            }
        }
    });
    (grad, hess)
}

/// Outcome of minimizing one profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSolve {
    pub eps: f64,
    pub energy: f64,
    pub profile: CellProfile,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes the cell energy at scale `eps` starting from `start`.
pub fn optimize_profile(start: &CellProfile, eps: f64, q: f64, pot: &Potential, max_iter: usize) -> Result<CellSolve> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("cell scale must lie in (0, 1], got {eps}")));
    }
    let quad = Quadrature::new();
    let free = start.free_indices();
    let nf = free.len();
    let mut p = start.clone();
    p.apply_clamps();
    let mut energy = cell_energy_with(&p, eps, q, pot, &quad).total;
    let mut converged = false;
    let mut iterations = 0;
    let mut shift = 0.0f64;
    for it in 0..max_iter {
        iterations = it + 1;
        let (g_all, h_all) = derivatives(&p, eps, q, pot, &quad);
        let g = DVector::from_iterator(nf, free.iter().map(|&i| g_all[i]));
        let h = DMatrix::from_fn(nf, nf, |a, b| h_all[(free[a], free[b])]);
        let diag_scale = (0..nf).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let gnorm = g.amax();
        if gnorm <= 1e-11 * diag_scale.max(1.0) * 1e-3 {
            converged = true;
            break;
        }
        // Levenberg shift until the shifted Hessian is positive definite
        let mut mu = shift;
        let step = loop {
            let mut hm = h.clone();
            for i in 0..nf {
                hm[(i, i)] += mu;
            }
            if let Some(ch) = hm.cholesky() {
                break ch.solve(&(-&g));
            }
            mu = if mu == 0.0 { 1e-10 * diag_scale } else { mu * 10.0 };
            if !mu.is_finite() || mu > 1e30 {
                return Err(Error::Numerical("cell Hessian could not be regularized".into()));
            }
        };
        shift = (mu * 0.1).max(0.0);
        if shift < 1e-12 * diag_scale {
            shift = 0.0;
        }
        let slope = g.dot(&step);
        if slope >= 0.0 {
            converged = true;
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-12 {
            let mut trial = p.clone();
            for (k, &i) in free.iter().enumerate() {
                trial.coeffs[i] += alpha * step[k];
            }
            let e = cell_energy_with(&trial, eps, q, pot, &quad).total;
            if e <= energy + 1e-4 * alpha * slope {
                p = trial;
                let decrease = energy - e;
                energy = e;
                accepted = true;
                if decrease <= 1e-15 * energy.abs().max(1e-300) && -slope < 1e-24 {
                    converged = true;
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // no further decrease is representable in floating point
            converged = -slope <= 1e-12 * energy.abs().max(1.0);
            break;
        }
        if converged {
            break;
        }
    }
    Ok(CellSolve { eps, energy, profile: p, iterations, converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellConfig {
    /// Knot intervals of the profile spline.
    pub knots: usize,
    /// Width of each clamped end zone.
    pub clamp: f64,
    /// Cell scales to scan, each in `(0, 1]`.
    pub eps_grid: Vec<f64>,
    pub max_iter: usize,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self { knots: 512, clamp: 0.05, eps_grid: geometric_grid(0.02, 1.0, 16), max_iter: 200 }
    }
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellEstimate {
    /// Smallest energy found over the scan.
    pub md: f64,
    pub argmin_eps: f64,
    pub profile: CellProfile,
    /// One entry per scanned ε, in the order of the configured grid.
    pub scan: Vec<CellSolve>,
}

/// Estimates `m_d` by minimizing the cell energy over profiles for every `ε`
/// in the grid and taking the smallest value.
pub fn estimate_md(pot: &Potential, q: f64, cfg: &CellConfig) -> Result<CellEstimate> {
    if cfg.eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty eps grid".into()));
    }
    CellProfile::validate(cfg.knots, cfg.clamp)?;
    let scan: Vec<CellSolve> = cfg
        .eps_grid
        .par_iter()
        .map(|&eps| {
            let start = CellProfile::tanh(cfg.knots, cfg.clamp, eps.min(0.5))?;
            optimize_profile(&start, eps, q, pot, cfg.max_iter)
        })
        .collect::<Result<_>>()?;
    let best = scan
        .iter()
        .filter(|s| s.energy.is_finite())
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .ok_or_else(|| Error::Numerical("no cell profile with finite energy".into()))?;
    Ok(CellEstimate { md: best.energy, argmin_eps: best.eps, profile: best.profile.clone(), scan })
}

/// Smallest eigenvalue of the second variation of the cell energy, relative
/// to the `L²` mass, for perturbations `φ(x) cos(μ y)` with transverse
/// wavenumbers `μ = 2πm`, `m = 0..=modes`. Negative values would mean the
/// transversally constant profile is not a local minimizer.
pub fn transverse_stability(p: &CellProfile, eps: f64, q: f64, pot: &Potential, modes: usize) -> Vec<(f64, f64)> {
    let quad = Quadrature::new();
    let free = p.free_indices();
    let nf = free.len();
    let pos: Vec<Option<usize>> = {
        let mut v = vec![None; p.coeffs.len()];
        for (k, &i) in free.iter().enumerate() {
            v[i] = Some(k);
        }
        v
    };
    let e2 = eps * eps;
    (0..=modes)
        .map(|m| {
            let mu = 2.0 * std::f64::consts::PI * m as f64;
            let mu2 = mu * mu;
            let mut h = DMatrix::<f64>::zeros(nf, nf);
            let mut mass = DMatrix::<f64>::zeros(nf, nf);
            Jet { p, quad: &quad }.for_each(|j, w, v, db| {
                let u = v[0] - e2 * v[2];
                let w2 = pot.w2(u) / eps;
                let lap: [f64; 4] = std::array::from_fn(|r| db[2][r] - mu2 * db[0][r]);
                let a: [f64; 4] = std::array::from_fn(|r| db[0][r] - e2 * lap[r]);
                let gl: [f64; 4] = std::array::from_fn(|r| db[3][r] - mu2 * db[1][r]);
                for r in 0..4 {
                    let Some(ir) = pos[j + r] else { continue };
                    for s in 0..4 {
                        let Some(is) = pos[j + s] else { continue };
                        h[(ir, is)] += w
                            * (w2 * a[r] * a[s] - 2.0 * eps * q * (db[1][r] * db[1][s] + mu2 * db[0][r] * db[0][s])
                                + 2.0 * (1.0 - 2.0 * q) * eps.powi(3) * lap[r] * lap[s]
                                + 2.0 * (1.0 - q) * eps.powi(5) * (gl[r] * gl[s] + mu2 * lap[r] * lap[s]));
                        mass[(ir, is)] += w * db[0][r] * db[0][s];
                    }
                }
            });
            let l = mass.cholesky().expect("spline mass matrix is positive definite").l();
            let linv = l.clone().try_inverse().expect("triangular factor is invertible");
            let sym: DMatrix<f64> = &linv * h * linv.transpose();
            let sym = (&sym + sym.transpose()) * 0.5;
            let min = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
            (mu, min)
        })
        .collect()
}
