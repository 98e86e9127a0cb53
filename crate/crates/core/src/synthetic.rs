//! Seeded smooth random fields for property checks and diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Grid2D, ScalarField, StatePair};

/// Highest cosine index used by the generators.
pub const MAX_MODE: usize = 6;
/// Number of modes summed per field.
pub const MODE_COUNT: usize = 10;

/// Sum of `MODE_COUNT` Neumann eigenfunctions `cos(k x̄) cos(l ȳ)` with
/// `k, l ≤ MAX_MODE` and standard normal amplitudes. Modes may repeat.
pub fn random_smooth_field(grid: &Grid2D, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (0..MODE_COUNT)
        .map(|_| {
            let k = rng.random_range(0..=MAX_MODE) as f64;
            let l = rng.random_range(0..=MAX_MODE) as f64;
            let a: f64 = rng.sample(StandardNormal);
            (k, l, a)
        })
        .collect();
    let half_pi = std::f64::consts::FRAC_PI_2;
    ScalarField::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(k, l, a)| a * (k * half_pi * (x + 1.0)).cos() * (l * half_pi * (y + 1.0)).cos())
            .sum()
    })
}

/// State with independent smooth position and velocity.
pub fn random_smooth_state(grid: &Grid2D, seed: u64) -> StatePair {
    let first = random_smooth_field(grid, seed.wrapping_mul(2));
    let second = random_smooth_field(grid, seed.wrapping_mul(2).wrapping_add(1));
    StatePair { first, second }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let g = Grid2D::new(16).unwrap();
        assert_eq!(random_smooth_field(&g, 3), random_smooth_field(&g, 3));
        assert_ne!(random_smooth_field(&g, 3), random_smooth_field(&g, 4));
    }

    #[test]
    fn ring_mirrors_first_interior_row() {
        // cosine modes are even about both walls
        let g = Grid2D::new(20).unwrap();
        let f = random_smooth_field(&g, 11);
        let v = f.values();
        let s = g.side();
        for k in 0..s {
            assert!((v[[0, k]] - v[[1, k]]).abs() < 1e-12);
            assert!((v[[s - 1, k]] - v[[s - 2, k]]).abs() < 1e-12);
        }
    }
}
