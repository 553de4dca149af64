//! One function per subcommand. Each writes its artifacts into the output
//! directory and returns the summary as ordered `key = value` pairs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use raftmin_core::energy::{f_star, f_v, mode_energy, optimal_mode};
use raftmin_core::gamma::{
    estimate_md, gamma_compare, geometric_grid, CellConfig, CompareOptions, PolygonRecoveryConfig,
};
use raftmin_core::grid::io::{read_raftfield, write_csv, write_raftfield};
use raftmin_core::minimize::{descend, random_initial, FlowConfig, FlowStatus, MassConstraint, Scheme};
use raftmin_core::operators::{helmholtz, helmholtz_inverse};
use raftmin_core::physical::nondimensionalize;
use raftmin_core::{
    make_grid, Boundary, EnergyBreakdown, EnergyParams, Grid, InterfaceGeometry, PhysicalParams, Potential, ScalarField,
};

use crate::config::{
    table1_sigma_range, Command, FieldKind, Functional, GeometryKind, ParamSource, PhysicalSpec, PotentialKind,
    RunConfig, SchemeSpec,
};
use crate::error::CliError;

pub type Summary = Vec<(String, String)>;

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn push(s: &mut Summary, key: &str, value: impl ToString) {
    s.push((key.to_string(), value.to_string()));
}

pub fn run(cfg: &RunConfig) -> Result<Summary, CliError> {
    let out = cfg.out_dir.as_path();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_text(out, "manifest.toml", &cfg.to_toml()?)?;
    let mut summary = match cfg.command {
        Command::Energy => energy(cfg)?,
        Command::Flow => flow(cfg)?,
        Command::Modes => modes(cfg)?,
        Command::Cell => cell(cfg)?,
        Command::Gamma => gamma(cfg)?,
        Command::Nondim => nondim(cfg)?,
        Command::Helmholtz => helmholtz_cmd(cfg)?,
    };
    summary.insert(0, ("command".into(), cfg.command.as_str().into()));
    let mut text = String::new();
    for (k, v) in &summary {
        writeln!(text, "{k} = {v}").expect("write to string");
    }
    write_text(out, "summary.txt", &text)?;
    Ok(summary)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| CliError::io(&path, e))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn finish(mut w: BufWriter<File>, dir: &Path, name: &str) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(&dir.join(name), e))
}

fn build_grid(cfg: &RunConfig) -> Result<Arc<Grid>, CliError> {
    let g = &cfg.grid;
    let boundary: Boundary = g.boundary.parse()?;
    Ok(make_grid(g.extents.len(), &g.extents, &g.points, boundary)?)
}

pub fn physical_params(spec: &PhysicalSpec) -> Result<PhysicalParams, CliError> {
    let p = PhysicalParams {
        a2: spec.a2,
        a4: spec.a4,
        b: spec.b,
        sigma: spec.sigma,
        kappa: spec.kappa,
        lambda: spec.lambda,
        length: spec.length,
    };
    p.validate()?;
    let (lo, hi) = table1_sigma_range();
    if spec.strict && !(p.sigma >= lo && p.sigma <= hi) {
        return Err(CliError::Config(format!("sigma = {} outside the tabulated range [{lo}, {hi}]", p.sigma)));
    }
    Ok(p)
}

fn potential(cfg: &RunConfig) -> Result<Potential, CliError> {
    Ok(match cfg.potential.kind {
        PotentialKind::Truncated => Potential::quartic_truncated(cfg.potential.s0)?,
        PotentialKind::Quartic => Potential::quartic(),
        PotentialKind::Physical => physical_params(&cfg.physical)?.potential()?,
    })
}

fn model(cfg: &RunConfig) -> Result<(EnergyParams, Potential), CliError> {
    match cfg.energy.source {
        ParamSource::Direct => Ok((EnergyParams::new(cfg.energy.eps, cfg.energy.q)?, potential(cfg)?)),
        ParamSource::Physical => {
            let p = physical_params(&cfg.physical)?;
            let nd = nondimensionalize(&p)?;
            Ok((EnergyParams::new(nd.eps, nd.q)?, p.potential()?))
        }
    }
}

fn build_field(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<ScalarField, CliError> {
    let f = &cfg.field;
    Ok(match f.kind {
        FieldKind::Mode => {
            let k = 2.0 * std::f64::consts::PI * f.mode as f64;
            ScalarField::from_fn(grid.clone(), |x| (k * x[0]).cos())?
        }
        FieldKind::Constant => ScalarField::constant(grid.clone(), f.value),
        FieldKind::Step => ScalarField::from_fn(grid.clone(), |x| if x[0] < f.offset { 1.0 } else { -1.0 })?,
        FieldKind::Random => random_initial(grid, f.mean, f.amplitude, cfg.seed),
        FieldKind::File => {
            let path =
                f.path.as_deref().ok_or_else(|| CliError::Config("field kind `file` needs field.path".into()))?;
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            let raw = read_raftfield(BufReader::new(file))
                .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
            raw.into_field(grid.clone()).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?
        }
    })
}

fn dump_field(dir: &Path, stem: &str, field: &ScalarField) -> Result<(), CliError> {
    let name = format!("{stem}.raftfield");
    let mut w = create(dir, &name)?;
    write_raftfield(field, &mut w)?;
    finish(w, dir, &name)?;
    if field.grid().dim() <= 2 {
        let name = format!("{stem}.csv");
        let mut w = create(dir, &name)?;
        write_csv(field, &mut w)?;
        finish(w, dir, &name)?;
    }
    Ok(())
}

fn breakdown_summary(s: &mut Summary, b: &EnergyBreakdown) {
    for (name, v) in b.terms() {
        push(s, name, num(v));
    }
    push(s, "total", num(b.total));
    if let Some(d) = &b.diagnostic {
        push(s, "diagnostic", d);
    }
}

fn energy(cfg: &RunConfig) -> Result<Summary, CliError> {
    let grid = build_grid(cfg)?;
    let (p, pot) = model(cfg)?;
    let u = build_field(cfg, &grid)?;
    let (name, b) = match cfg.energy.functional {
        Functional::Fstar => ("fstar", f_star(&u, &p, &pot)?),
        Functional::Fv => ("fv", f_v(&u, &p, &pot, None)?),
    };
    let dir = cfg.out_dir.as_path();
    write_text(dir, "energy.txt", &format!("{b}\n"))?;

    let mut header = String::from("functional,eps,q");
    let mut row = format!("{name},{},{}", num(p.eps), num(p.q));
    for (term, v) in b.terms() {
        write!(header, ",{term}").expect("write to string");
        write!(row, ",{}", num(v)).expect("write to string");
    }
    write!(header, ",total").expect("write to string");
    write!(row, ",{}", num(b.total)).expect("write to string");

    let mut s = Summary::new();
    push(&mut s, "functional", name);
    push(&mut s, "eps", num(p.eps));
    push(&mut s, "q", num(p.q));
    breakdown_summary(&mut s, &b);
    if cfg.field.kind == FieldKind::Mode {
        let m = mode_energy(p.q, p.eps, cfg.field.mode);
        // quadratic part of ε F*, equal to F_qn for a normalized mode
        let quad = p.eps * (b.total - b.potential);
        header.push_str(",n,lambda,f_qn,eps_quadratic");
        write!(row, ",{},{},{},{}", cfg.field.mode, num(m.lambda), num(m.f_qn), num(quad)).expect("write to string");
        push(&mut s, "f_qn", num(m.f_qn));
        push(&mut s, "eps_quadratic", num(quad));
    }
    write_text(dir, "energy.csv", &format!("{header}\n{row}\n"))?;
    Ok(s)
}

fn flow(cfg: &RunConfig) -> Result<Summary, CliError> {
    let grid = build_grid(cfg)?;
    let (p, pot) = model(cfg)?;
    let u0 = build_field(cfg, &grid)?;
    let f = &cfg.flow;
    let fc = FlowConfig {
        scheme: match f.scheme {
            SchemeSpec::SemiImplicit => Scheme::SemiImplicitSpectral,
            SchemeSpec::L2Descent => Scheme::L2Descent,
        },
        dt: f.dt,
        max_steps: f.max_steps,
        tolerance: f.tolerance,
        mass: if f.fixed_mean { MassConstraint::FixedMean(u0.mean()) } else { MassConstraint::None },
        seed: cfg.seed,
        divergence_floor: None,
        stabilization: f.stabilization,
        record_every: f.record_every,
    };
    let r = descend(&u0, &p, &pot, &fc)?;
    let dir = cfg.out_dir.as_path();
    let mut w = create(dir, "trajectory.csv")?;
    let werr = |e| CliError::io(&dir.join("trajectory.csv"), e);
    writeln!(w, "step,energy,grad_norm,mean,dominant_wavenumber").map_err(werr)?;
    for t in &r.trajectory {
        writeln!(w, "{},{},{},{},{}", t.step, num(t.energy), num(t.grad_norm), num(t.mean), num(t.dominant_wavenumber))
            .map_err(werr)?;
    }
    finish(w, dir, "trajectory.csv")?;
    dump_field(dir, "final", &r.field)?;

    let last = r.trajectory.last().expect("trajectory has the initial row");
    let mut s = Summary::new();
    push(&mut s, "eps", num(p.eps));
    push(&mut s, "q", num(p.q));
    push(
        &mut s,
        "status",
        match r.status {
            FlowStatus::Converged => "converged",
            FlowStatus::MaxSteps => "max_steps",
        },
    );
    push(&mut s, "steps", r.steps);
    push(&mut s, "energy", num(r.energy));
    push(&mut s, "grad_norm", num(last.grad_norm));
    push(&mut s, "mean", num(last.mean));
    push(&mut s, "dominant_wavenumber", num(last.dominant_wavenumber));
    push(&mut s, "eps2_lambda2", num(p.eps * p.eps * last.dominant_wavenumber.powi(2)));
    Ok(s)
}

fn modes(cfg: &RunConfig) -> Result<Summary, CliError> {
    let (eps, q) = (cfg.energy.eps, cfg.energy.q);
    EnergyParams::new(eps, q)?;
    if cfg.modes.nmax == 0 {
        return Err(CliError::Config("modes.nmax must be at least 1".into()));
    }
    let opt = optimal_mode(q, eps)?;
    let dir = cfg.out_dir.as_path();
    let mut text = String::from("n,lambda,eps2_lambda2,f_qn,destabilizing\n");
    let mut best = (0, f64::INFINITY);
    for n in 1..=cfg.modes.nmax {
        let m = mode_energy(q, eps, n);
        let t = eps * eps * m.lambda * m.lambda;
        writeln!(text, "{n},{},{},{},{}", num(m.lambda), num(t), num(m.f_qn), m.destabilizing)
            .expect("write to string");
        if m.f_qn < best.1 {
            best = (n, m.f_qn);
        }
    }
    write_text(dir, "modes.csv", &text)?;
    let mut s = Summary::new();
    push(&mut s, "eps", num(eps));
    push(&mut s, "q", num(q));
    push(&mut s, "argmin_n", best.0);
    push(&mut s, "min_f_qn", num(best.1));
    push(&mut s, "optimal_eps2_lambda2", num(opt.eps2_lambda2));
    push(&mut s, "optimal_lambda", num(opt.lambda_sq.sqrt()));
    push(&mut s, "f_star", num(opt.f_star));
    Ok(s)
}

fn cell_config(cfg: &RunConfig) -> Result<CellConfig, CliError> {
    let c = &cfg.cell;
    if !(c.eps_min > 0.0 && c.eps_min <= c.eps_max && c.eps_max <= 1.0 && c.eps_count >= 1) {
        return Err(CliError::Config(format!(
            "cell scan needs 0 < eps_min <= eps_max <= 1 and eps_count >= 1, got {}, {}, {}",
            c.eps_min, c.eps_max, c.eps_count
        )));
    }
    Ok(CellConfig {
        knots: c.knots,
        clamp: c.clamp,
        eps_grid: geometric_grid(c.eps_min, c.eps_max, c.eps_count),
        max_iter: c.max_iter,
    })
}

fn cell(cfg: &RunConfig) -> Result<Summary, CliError> {
    let pot = potential(cfg)?;
    let q = cfg.energy.q;
    let est = estimate_md(&pot, q, &cell_config(cfg)?)?;
    let dir = cfg.out_dir.as_path();
    let mut text = String::from("eps,energy,iterations,converged\n");
    for c in &est.scan {
        writeln!(text, "{},{},{},{}", num(c.eps), num(c.energy), c.iterations, c.converged).expect("write to string");
    }
    write_text(dir, "scan.csv", &text)?;
    let n = cfg.cell.profile_samples.max(2);
    let mut text = String::from("x,w\n");
    for i in 0..n {
        let x = -0.5 + i as f64 / (n - 1) as f64;
        writeln!(text, "{},{}", num(x), num(est.profile.value(x))).expect("write to string");
    }
    write_text(dir, "profile.csv", &text)?;
    let mut s = Summary::new();
    push(&mut s, "q", num(q));
    push(&mut s, "md", num(est.md));
    push(&mut s, "argmin_eps", num(est.argmin_eps));
    push(&mut s, "floor", num(q * pot.sqrt_w_integral()));
    push(&mut s, "all_converged", est.scan.iter().all(|c| c.converged));
    Ok(s)
}

fn gamma(cfg: &RunConfig) -> Result<Summary, CliError> {
    let grid = build_grid(cfg)?;
    let pot = potential(cfg)?;
    let g = &cfg.gamma;
    let geometry = match g.geometry {
        GeometryKind::Slab => InterfaceGeometry::FlatSlab { axis: g.axis, offset: g.offset },
        GeometryKind::Square => InterfaceGeometry::square([0.0, 0.0], g.side),
    };
    let opts = CompareOptions {
        cell: cell_config(cfg)?,
        layer_half_width: g.layer_half_width,
        fixed_eps0: g.fixed_eps0,
        polygon: PolygonRecoveryConfig { delta: g.delta, eta: g.eta },
    };
    let t = gamma_compare(&grid, &geometry, &pot, cfg.energy.q, &g.eps, &opts)?;
    let dir = cfg.out_dir.as_path();
    let mut w = create(dir, "gamma.csv")?;
    t.write_csv(&mut w)?;
    finish(w, dir, "gamma.csv")?;
    let mut text =
        String::from("eps,eps0,energy,md_times_per,ratio,residual,cell_energy,l2_to_sharp,gluing_constant\n");
    for r in &t.rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            num(r.eps),
            num(r.eps0),
            num(r.energy),
            num(r.md_times_per),
            num(r.ratio),
            num(r.residual),
            num(r.cell_energy),
            num(r.l2_to_sharp),
            r.gluing_constant.map(num).unwrap_or_default()
        )
        .expect("write to string");
    }
    write_text(dir, "gamma_detail.csv", &text)?;
    let mut s = Summary::new();
    push(&mut s, "q", num(cfg.energy.q));
    push(&mut s, "md", num(t.md));
    push(&mut s, "md_eps", num(t.md_eps));
    push(&mut s, "perimeter", num(t.perimeter));
    push(&mut s, "final_ratio", num(t.rows.last().expect("nonempty eps list").ratio));
    push(&mut s, "trend_ok", t.trend_ok());
    Ok(s)
}

fn nondim(cfg: &RunConfig) -> Result<Summary, CliError> {
    let p = physical_params(&cfg.physical)?;
    let nd = nondimensionalize(&p)?;
    let text = format!(
        "sigma,eps,q,w_scale,intrinsic_length\n{},{},{},{},{}\n",
        num(p.sigma),
        num(nd.eps),
        num(nd.q),
        num(nd.w_scale),
        num(nd.intrinsic_length)
    );
    write_text(cfg.out_dir.as_path(), "nondim.csv", &text)?;
    let mut s = Summary::new();
    push(&mut s, "sigma", num(p.sigma));
    push(&mut s, "eps", num(nd.eps));
    push(&mut s, "q", num(nd.q));
    push(&mut s, "w_scale", num(nd.w_scale));
    push(&mut s, "intrinsic_length", num(nd.intrinsic_length));
    Ok(s)
}

fn helmholtz_cmd(cfg: &RunConfig) -> Result<Summary, CliError> {
    let grid = build_grid(cfg)?;
    let eps = cfg.energy.eps;
    let u = build_field(cfg, &grid)?;
    let v = helmholtz_inverse(&u, eps)?;
    let back = helmholtz(&v, eps)?;
    let residual = back.axpy(-1.0, &u)?.max_abs();
    dump_field(cfg.out_dir.as_path(), "v", &v)?;
    let mut s = Summary::new();
    push(&mut s, "eps", num(eps));
    push(&mut s, "u_l2", num(u.norm_l2()));
    push(&mut s, "v_l2", num(v.norm_l2()));
    push(&mut s, "residual_max", num(residual));
    Ok(s)
}
