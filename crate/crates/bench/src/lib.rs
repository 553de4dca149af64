//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use raftmin_core::grid::random_smooth_field;
use raftmin_core::{make_grid, Boundary, Grid, ScalarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Square Neumann grid on `(-1, 1)^d` with `n` points per axis.
pub fn square_grid(d: usize, n: usize) -> Arc<Grid> {
    make_grid(d, &vec![2.0; d], &vec![n; d], Boundary::Neumann).expect("valid benchmark grid")
}

/// Deterministic smooth test field of unit amplitude.
pub fn smooth_field(grid: &Arc<Grid>, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_smooth_field(grid, 40.0, 1.0, &mut rng)
}
