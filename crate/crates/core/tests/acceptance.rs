//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use raftmin_core::energy::{
    f_star, f_star_gradient, f_v, i_eps, interpolation_constant, lower_bound_check, lower_bound_q0, optimal_mode,
};
use raftmin_core::gamma::{
    estimate_md, gamma_compare, measure_interface, CellConfig, CompareOptions, InterfaceGeometry,
};
use raftmin_core::grid::random_smooth_field;
use raftmin_core::minimize::{descend, dominant_wavenumber, random_initial, FlowConfig, MassConstraint};
use raftmin_core::operators::{elliptic_constant, helmholtz_inverse};
use raftmin_core::physical::{nondimensionalize, reduced_equals_full, PhysicalParams, TABLE1_SIGMA_RANGE};
use raftmin_core::potential::estimate_constants;
use raftmin_core::{make_grid, Boundary, EnergyParams, Potential, ScalarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Standard double well, floor constant `∫₋₁¹ √W = 4/3`.
const MM_FLOOR: f64 = 4.0 / 3.0;

fn mode_energies() -> Result<Outcome, String> {
    let pot = Potential::standard();
    let mut worst = 0.0f64;
    let mut three_quarters = f64::NAN;
    for d in [1usize, 2] {
        let g = make_grid(d, &vec![2.0; d], &vec![if d == 1 { 256 } else { 64 }; d], Boundary::Neumann).map_err(err)?;
        let psi = ScalarField::from_fn(g.clone(), |x| (2.0 * PI * x[0]).cos()).map_err(err)?;
        let quad_factor = psi.norm_l2().powi(2);
        for q in [0.19f64, 0.5, 0.75] {
            let r = (1.0 - q).sqrt();
            let t_star = 1.0 / r - 1.0;
            let eps = t_star.sqrt() / (2.0 * PI);
            let e = f_star(&psi, &EnergyParams::new(eps, q).map_err(err)?, &pot).map_err(err)?;
            let numeric = e.total - e.potential;
            let closed = (-2.0 + 2.0 * r + q) / eps * quad_factor;
            worst = worst.max((numeric - closed).abs() / closed.abs());
            if q == 0.75 && d == 1 {
                three_quarters = eps * numeric / quad_factor;
            }
        }
    }
    let f_opt = optimal_mode(0.75, 0.05).map_err(err)?.f_star;
    let pass = worst < 1e-6 && (three_quarters + 0.25).abs() < 1e-6 && (f_opt + 0.25).abs() < 1e-15;
    Ok(Outcome {
        pass,
        detail: format!("max rel err {worst:.2e}, F* at q=3/4 {three_quarters:.12}, closed form {f_opt}"),
    })
}

fn resolvent_exactness() -> Result<Outcome, String> {
    let eps = 0.05;
    let mut worst = 0.0f64;
    for d in [1usize, 2] {
        let g = make_grid(d, &vec![2.0; d], &vec![if d == 1 { 256 } else { 64 }; d], Boundary::Neumann).map_err(err)?;
        for n in 1..=4u32 {
            let lam = 2.0 * PI * n as f64;
            let psi = ScalarField::from_fn(g.clone(), |x| (lam * x[0]).cos()).map_err(err)?;
            let v = helmholtz_inverse(&psi, eps).map_err(err)?;
            let factor = 1.0 / (1.0 + eps * eps * lam * lam);
            let diff = v.axpy(-factor, &psi).map_err(err)?.max_abs() / (factor * psi.max_abs());
            worst = worst.max(diff);
        }
    }
    Ok(Outcome { pass: worst < 1e-10, detail: format!("max rel err {worst:.2e}") })
}

fn u_v_equivalence() -> Result<Outcome, String> {
    let g = make_grid(2, &[2.0, 2.0], &[64, 64], Boundary::Neumann).map_err(err)?;
    let pot = Potential::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fields: Vec<ScalarField> =
        (0..50).map(|i| random_smooth_field(&g, 12.0 + i as f64 * 0.5, 1.5, &mut rng)).collect();
    let mut worst = 0.0f64;
    let mut infinite = 0;
    for eps in [0.02, 0.1] {
        for q in [-0.5, 0.0, 0.3] {
            let p = EnergyParams::new(eps, q).map_err(err)?;
            for u in &fields {
                let a = f_star(u, &p, &pot).map_err(err)?.total;
                let b = f_v(&helmholtz_inverse(u, eps).map_err(err)?, &p, &pot, None).map_err(err)?.total;
                if !b.is_finite() {
                    infinite += 1;
                }
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
    }
    Ok(Outcome {
        pass: worst < 1e-9 && infinite == 0,
        detail: format!("300 evaluations, max rel err {worst:.2e}, flux rejections {infinite}"),
    })
}

fn height_elimination() -> Result<Outcome, String> {
    let g = make_grid(2, &[2.0, 2.0], &[64, 64], Boundary::Neumann).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (lo, hi) = TABLE1_SIGMA_RANGE;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let sigma = lo * (hi / lo).powf(i as f64 / 19.0);
        let p = PhysicalParams::table1(sigma);
        let u = random_smooth_field(&g, 15.0, 1.2, &mut rng);
        let r = reduced_equals_full(&u, &p).map_err(err)?;
        worst = worst.max(r.rel_error);
    }
    Ok(Outcome {
        pass: worst < 1e-8,
        detail: format!("20 fields, sigma over the table range, max rel err {worst:.2e}"),
    })
}

fn nondimensionalization() -> Result<Outcome, String> {
    let nd = nondimensionalize(&PhysicalParams::table1(1e-5)).map_err(err)?;
    let (lo, hi) = TABLE1_SIGMA_RANGE;
    let q_hi = nondimensionalize(&PhysicalParams::table1(lo)).map_err(err)?.q;
    let q_lo = nondimensionalize(&PhysicalParams::table1(hi)).map_err(err)?.q;
    let eps_ok = (nd.eps - 1e-2).abs() <= 2.0 * f64::EPSILON * 1e-2;
    let range_ok = q_lo > -1.1 && q_hi < 1.0;
    Ok(Outcome {
        pass: eps_ok && range_ok,
        detail: format!("eps = {:.17e}, q over sigma range = [{q_lo:.6}, {q_hi:.6}]", nd.eps),
    })
}

fn md_floor() -> Result<Outcome, String> {
    let pot = Potential::standard();
    let q = 0.05;
    let cfg = CellConfig::default();
    let est = estimate_md(&pot, q, &cfg).map_err(err)?;
    let floor = q * MM_FLOOR * (1.0 - 0.02);
    Ok(Outcome {
        pass: est.md > 0.0 && est.md >= floor,
        detail: format!(
            "md = {:.8} at eps {:.4} ({} knots, {} eps values), floor {floor:.6}, int sqrt W = {:.12}",
            est.md,
            est.argmin_eps,
            cfg.knots,
            cfg.eps_grid.len(),
            pot.sqrt_w_integral()
        ),
    })
}

fn gamma_trend() -> Result<Outcome, String> {
    let g = make_grid(2, &[1.0, 1.0], &[256, 256], Boundary::Neumann).map_err(err)?;
    let geo = InterfaceGeometry::FlatSlab { axis: 0, offset: 0.0 };
    let t = gamma_compare(&g, &geo, &Potential::standard(), 0.05, &[0.1, 0.05, 0.02], &CompareOptions::default())
        .map_err(err)?;
    let dev: Vec<f64> = t.rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let decreasing = dev.windows(2).all(|w| w[1] < w[0]);
    let last = *dev.last().unwrap_or(&f64::INFINITY);
    let ratios: Vec<String> = t.rows.iter().map(|r| format!("{:.6}", r.ratio)).collect();
    Ok(Outcome {
        pass: decreasing && last <= 0.15,
        detail: format!("md = {:.6}, Per = {}, ratios [{}]", t.md, t.perimeter, ratios.join(", ")),
    })
}

fn gradient_check() -> Result<Outcome, String> {
    let g = make_grid(2, &[2.0, 2.0], &[64, 64], Boundary::Neumann).map_err(err)?;
    let pot = Potential::standard();
    let p = EnergyParams::new(0.1, 0.3).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_smooth_field(&g, 15.0, 1.2, &mut rng);
    let grad = f_star_gradient(&u, &p, &pot).map_err(err)?;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let dir = random_smooth_field(&g, 20.0, 1.0, &mut rng);
        let plus = f_star(&u.axpy(h, &dir).map_err(err)?, &p, &pot).map_err(err)?.total;
        let minus = f_star(&u.axpy(-h, &dir).map_err(err)?, &p, &pot).map_err(err)?.total;
        let fd = (plus - minus) / (2.0 * h);
        let an = grad.inner(&dir).map_err(err)?;
        worst = worst.max((fd - an).abs() / an.abs());
    }
    Ok(Outcome { pass: worst < 1e-6, detail: format!("10 directions, max rel err {worst:.2e}") })
}

fn lower_bound_suite() -> Result<Outcome, String> {
    let g = make_grid(2, &[2.0, 2.0], &[64, 64], Boundary::Neumann).map_err(err)?;
    let pot = Potential::standard();
    let eps = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut corpus = Vec::new();
    for lmax in [5.0, 10.0, 20.0, 40.0] {
        for amp in [0.25, 0.5, 1.0, 1.5, 2.0] {
            corpus.push(random_smooth_field(&g, lmax, amp, &mut rng));
        }
    }
    let q_star = interpolation_constant(&corpus, eps, &pot).q_star;
    let c_omega = elliptic_constant(&corpus);
    let constants = estimate_constants(&pot);
    let q0 = lower_bound_q0(q_star, &constants);
    let p = EnergyParams::new(eps, 0.5 * q0).map_err(err)?;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..100 {
        let lmax = 5.0 + (i % 10) as f64 * 4.0;
        let amp = 0.2 + (i / 10) as f64 * 0.2;
        let v = random_smooth_field(&g, lmax, amp, &mut rng);
        let r = lower_bound_check(&v, &p, &pot, q_star, c_omega, &constants).map_err(err)?;
        if !r.holds() {
            violations += 1;
        }
        let scale = r.energy.abs().max(i_eps(&v, eps, &pot, None).map_err(err)?);
        min_margin = min_margin.min(r.margin / scale);
    }
    Ok(Outcome {
        pass: violations == 0,
        detail: format!(
            "q* = {q_star:.4}, C = {c_omega:.2e}, q0 = {q0:.3e}, q = {:.3e}, violations {violations}/100, min rel margin {min_margin:.3e}",
            p.q
        ),
    })
}

fn descent_sanity() -> Result<Outcome, String> {
    let pot = Potential::standard();
    // q = 3/4 from small random data
    let g = make_grid(1, &[2.0], &[256], Boundary::Neumann).map_err(err)?;
    let p = EnergyParams::new(0.05, 0.75).map_err(err)?;
    let target = optimal_mode(p.q, p.eps).map_err(err)?.eps2_lambda2;
    let mut peaks = Vec::new();
    let mut peak_values = Vec::new();
    for seed in 0..3 {
        let u0 = random_initial(&g, 0.0, 0.1, seed);
        let cfg = FlowConfig {
            dt: 0.05,
            max_steps: 50_000,
            mass: MassConstraint::FixedMean(0.0),
            seed,
            record_every: 1000,
            ..FlowConfig::default()
        };
        let r = descend(&u0, &p, &pot, &cfg).map_err(err)?;
        let lam = dominant_wavenumber(&r.field.transform());
        peaks.push(format!("{:.4} ({:?}, E {:.4})", p.eps * p.eps * lam * lam, r.status, r.energy));
        peak_values.push(p.eps * p.eps * lam * lam);
    }
    let peaks_ok = peak_values.iter().all(|t: &f64| (t - target).abs() <= 0.25 * target);

    // q = 0.05 from a step
    let g = make_grid(1, &[2.0], &[512], Boundary::Neumann).map_err(err)?;
    let p = EnergyParams::new(0.02, 0.05).map_err(err)?;
    let u0 = ScalarField::from_fn(g, |x| if x[0] < 0.0 { 1.0 } else { -1.0 }).map_err(err)?;
    let cfg = FlowConfig { dt: 0.01, max_steps: 50_000, mass: MassConstraint::FixedMean(0.0), ..FlowConfig::default() };
    let r = descend(&u0, &p, &pot, &cfg).map_err(err)?;
    let per = measure_interface(&r.field).map_err(err)?;
    let floor = p.q * MM_FLOOR * (1.0 - 0.02) * per;
    let step_ok = r.energy >= 0.0 && r.energy >= floor;
    Ok(Outcome {
        pass: peaks_ok && step_ok,
        detail: format!(
            "q=0.75 peaks eps^2 lambda^2 [{}] vs {target} +/- 25%: {}; q=0.05 energy {:.6} ({:?}), perimeter {per}, floor {floor:.6}: {}",
            peaks.join(", "),
            if peaks_ok { "ok" } else { "off" },
            r.energy,
            r.status,
            if step_ok { "ok" } else { "off" }
        ),
    })
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, Check); 10] = [
        (1, "mode energy closed forms", 1, mode_energies),
        (2, "resolvent exactness", 1, resolvent_exactness),
        (3, "u/v equivalence", 30, u_v_equivalence),
        (4, "height elimination identity", 30, height_elimination),
        (5, "nondimensionalization", 1, nondimensionalization),
        (6, "m_d positivity and floor", 300, md_floor),
        (7, "gamma trend", 300, gamma_trend),
        (8, "gradient correctness", 60, gradient_check),
        (9, "lower-bound falsification", 120, lower_bound_suite),
        (10, "descent sanity", 600, descent_sanity),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {detail} [{:.2}s of {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
