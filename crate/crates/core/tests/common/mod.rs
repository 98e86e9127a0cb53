//! Helpers shared by the integration test targets.

use std::f64::consts::PI;

use cavity_core::ScalarField;
use ndarray::Array2;

/// Midpoint-rule L² projection onto `cos(kπ(x+1)/2) cos(lπ(y+1)/2)`,
/// evaluated term by term.
pub fn brute_force_coeffs(f: &ScalarField) -> Array2<f64> {
    let g = f.grid();
    let n = g.n();
    let dx = g.dx();
    let v = f.values();
    Array2::from_shape_fn((n, n), |(k, l)| {
        let mut acc = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                let x = -1.0 + (i as f64 - 0.5) * dx;
                let y = -1.0 + (j as f64 - 0.5) * dx;
                acc += v[[i, j]] * (k as f64 * PI * (x + 1.0) / 2.0).cos() * (l as f64 * PI * (y + 1.0) / 2.0).cos();
            }
        }
        // ∫ cos² over [-1, 1] is 2 for the constant mode and 1 otherwise
        let norm = if k == 0 { 2.0 } else { 1.0 } * if l == 0 { 2.0 } else { 1.0 };
        acc * dx * dx / norm
    })
}

