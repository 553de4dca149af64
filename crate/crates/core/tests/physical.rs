use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use raftmin_core::grid::random_smooth_field;
use raftmin_core::physical::{
    full_energy, height_balance, height_residual, longwave_energy, nondimensionalize, reduced_equals_full, solve_height,
};
use raftmin_core::{make_grid, Boundary, PhysicalParams};

#[test]
fn optimal_height_solves_euler_lagrange() {
    let g = make_grid(2, &[1.0, 1.0], &[48, 48], Boundary::Neumann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &sigma in &[6e-6, 2e-5, 9e-5] {
        let p = PhysicalParams::table1(sigma);
        let u = random_smooth_field(&g, 30.0, 1.0, &mut rng);
        let h = solve_height(&u, &p).unwrap();
        assert!(height_residual(&u, &h, &p).unwrap() < 1e-9);
        assert!(height_balance(&u, &h, &p).unwrap() < 1e-8);
        assert!(h.mean().abs() < 1e-12 * h.max_abs());
    }
}

#[test]
fn optimal_height_minimizes_energy() {
    let g = make_grid(1, &[1.0], &[65], Boundary::Periodic).unwrap();
    let p = PhysicalParams::table1(2e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_smooth_field(&g, 40.0, 1.0, &mut rng);
    let h = solve_height(&u, &p).unwrap();
    let e0 = full_energy(&u, &h, &p).unwrap().total;
    for k in 0..5 {
        let dh = random_smooth_field(&g, 40.0, 1e-3 * h.max_abs(), &mut ChaCha8Rng::seed_from_u64(k));
        let e = full_energy(&u, &h.axpy(1.0, &dh).unwrap(), &p).unwrap().total;
        assert!(e >= e0, "perturbation {k} lowered the energy");
    }
}

#[test]
fn height_is_linear_in_composition() {
    let g = make_grid(1, &[2.0], &[128], Boundary::Neumann).unwrap();
    let p = PhysicalParams::table1(1e-5);
    let modes: Vec<_> = [1, 5, 17].iter().map(|&k| g.basis_function(&[k]).unwrap()).collect();
    let coef = [0.3, -1.1, 0.45];
    let mut u = modes[0].scale(coef[0]);
    for (m, c) in modes.iter().zip(coef).skip(1) {
        u = u.axpy(c, m).unwrap();
    }
    let h = solve_height(&u, &p).unwrap();
    let mut sum = solve_height(&modes[0], &p).unwrap().scale(coef[0]);
    for (m, c) in modes.iter().zip(coef).skip(1) {
        sum = sum.axpy(c, &solve_height(m, &p).unwrap()).unwrap();
    }
    let scale = h.max_abs();
    for (a, b) in h.values().iter().zip(sum.values()) {
        assert!((a - b).abs() < 1e-12 * scale);
    }
}

#[test]
fn reduction_holds_across_tension_range() {
    let g = make_grid(2, &[1.0, 1.0], &[32, 32], Boundary::Neumann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for &sigma in &[5e-6, 3e-5, 1e-4] {
        let u = random_smooth_field(&g, 25.0, 1.0, &mut rng);
        let r = reduced_equals_full(&u, &PhysicalParams::table1(sigma)).unwrap();
        r.check(1e-10).unwrap();
    }
}

#[test]
fn longwave_gap_shrinks_with_wavelength() {
    // single cosine on (0, L): the gap to the reduced energy is fourth order in ελ
    let g = make_grid(1, &[1.0], &[256], Boundary::Neumann).unwrap();
    let p = PhysicalParams::table1(2e-5);
    let nd = nondimensionalize(&p).unwrap();
    let mut rel = Vec::new();
    for &k in &[8, 4, 2] {
        let u = g.basis_function(&[k]).unwrap().scale(0.2);
        let h = solve_height(&u, &p).unwrap();
        let exact = full_energy(&u, &h, &p).unwrap();
        let approx = longwave_energy(&u, &p).unwrap();
        let quad = exact.total - exact.potential;
        let quad_ap = approx - u.map(|s| p.f(s)).integrate();
        let t = nd.eps * nd.eps * g.eigenvalue(&[k]);
        rel.push((t, (quad - quad_ap).abs() / quad_ap.abs().max(quad.abs())));
    }
    for w in rel.windows(2) {
        let (t0, r0) = w[0];
        let (t1, r1) = w[1];
        let order = (r0 / r1).ln() / (t0 / t1).ln();
        assert!(order > 1.8, "{rel:?}");
    }
}
