//! Energy functional, the state-space norms and the boundary-mean
//! projectors onto the subspaces where the energy seminorm controls the
//! full norm.
//!
//! Integrals over the square use the midpoint rule on the `n × n` interior
//! nodes with weight `dx²`; gradients are centred differences, which read
//! the boundary ring for the first interior row. Integrals over the wall use
//! the midpoint rule along each side, with the wall value taken as the mean
//! of the ring node and its inward neighbour.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, StatePair};

/// `∫ |∇u₀|² + c⁻² u₁²` over the square.
pub fn energy(s: &StatePair, c: &ScalarField) -> Result<f64> {
    let grid = s.grid();
    grid.ensure_same(c.grid(), "sound speed")?;
    if c.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("sound speed must be strictly positive".into()));
    }
    let n = grid.n();
    let u = s.first.values();
    let v = s.second.values();
    let cv = c.values();
    let inv2dx = 1.0 / (2.0 * grid.dx());
    let mut acc = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            let gx = (u[[i + 1, j]] - u[[i - 1, j]]) * inv2dx;
            let gy = (u[[i, j + 1]] - u[[i, j - 1]]) * inv2dx;
            let w = v[[i, j]] / cv[[i, j]];
            acc += gx * gx + gy * gy + w * w;
        }
    }
    Ok(acc * grid.dx() * grid.dx())
}

/// `|s| = √𝔼(s)`.
pub fn seminorm(s: &StatePair, c: &ScalarField) -> Result<f64> {
    energy(s, c).map(f64::sqrt)
}

/// `‖s‖ = (‖u₀‖²_{L²} + 𝔼(s))^{1/2}`.
pub fn full_norm(s: &StatePair, c: &ScalarField) -> Result<f64> {
    let l2 = s.first.l2_norm();
    Ok((l2 * l2 + energy(s, c)?).sqrt())
}

/// `(1/|∂Ω|) ∫_{∂Ω} h`.
pub fn boundary_mean(h: &ScalarField) -> f64 {
    let grid = h.grid();
    let n = grid.n();
    let s = grid.side();
    let v = h.values();
    let mut acc = 0.0;
    for k in 1..=n {
        acc += 0.5 * (v[[k, 0]] + v[[k, 1]]);
        acc += 0.5 * (v[[k, s - 1]] + v[[k, s - 2]]);
        acc += 0.5 * (v[[0, k]] + v[[1, k]]);
        acc += 0.5 * (v[[s - 1, k]] + v[[s - 2, k]]);
    }
    // n cells of width dx on each of four sides: total weight is exactly 8
    acc / (4 * n) as f64
}

/// Target subspace of the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// Zero boundary mean of the first component.
    H0,
    /// Zero boundary mean and zero second component.
    H1,
}

impl Subspace {
    pub fn project(self, s: &StatePair) -> StatePair {
        match self {
            Subspace::H0 => project_h0(s),
            Subspace::H1 => project_h1(s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subspace::H0 => "H0",
            Subspace::H1 => "H1",
        }
    }
}

impl std::str::FromStr for Subspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H0" | "h0" => Ok(Subspace::H0),
            "H1" | "h1" => Ok(Subspace::H1),
            other => Err(Error::InvalidArgument(format!(
                "unknown subspace `{other}` (expected H0 or H1)"
            ))),
        }
    }
}

fn remove_boundary_mean(h: &ScalarField) -> ScalarField {
    let mean = boundary_mean(h);
    h.map(|v| v - mean)
}

/// `Π₀(h₀, h₁) = (h₀ − mean_{∂Ω} h₀, h₁)`.
pub fn project_h0(s: &StatePair) -> StatePair {
    StatePair {
        first: remove_boundary_mean(&s.first),
        second: s.second.clone(),
    }
}

/// `Π₁(h₀, h₁) = (h₀ − mean_{∂Ω} h₀, 0)`.
pub fn project_h1(s: &StatePair) -> StatePair {
    StatePair {
        first: remove_boundary_mean(&s.first),
        second: ScalarField::zeros(s.grid()),
    }
}
