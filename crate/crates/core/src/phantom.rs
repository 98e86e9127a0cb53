//! Smooth test phantom (a sum of compactly supported radial bumps) and
//! additive white measurement noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::boundary::{BoundarySpec, BoundaryTrace};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};

/// Name of the built-in six-bump preset.
pub const PAPER_SIX: &str = "paper-six";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: (f64, f64),
    pub radius: f64,
    pub amplitude: f64,
}

impl BumpSpec {
    pub fn new(center: (f64, f64), radius: f64, amplitude: f64) -> Self {
        Self {
            center,
            radius,
            amplitude,
        }
    }

    /// The support disk must lie strictly inside the square.
    pub fn validate(&self) -> Result<()> {
        let (cx, cy) = self.center;
        let finite = cx.is_finite() && cy.is_finite() && self.amplitude.is_finite();
        if !finite || !(self.radius > 0.0) {
            return Err(Error::InvalidArgument(format!("malformed bump {self:?}")));
        }
        if cx.abs().max(cy.abs()) + self.radius >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "bump at ({cx}, {cy}) with radius {} leaves the domain",
                self.radius
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = (x - self.center.0).hypot(y - self.center.1);
        radial_bump(r, self.radius, self.amplitude)
    }
}

/// `a·(1 − (r/R)²)²` inside the disk, zero outside. Value and slope vanish
/// at `r = R`, so the bump is C¹.
pub fn radial_bump(r: f64, radius: f64, amplitude: f64) -> f64 {
    if r >= radius {
        return 0.0;
    }
    let q = 1.0 - (r / radius).powi(2);
    amplitude * q * q
}

/// Six well-separated inclusions of equal radius.
pub fn paper_six() -> Vec<BumpSpec> {
    const CENTERS: [(f64, f64); 6] = [
        (-0.45, 0.35),
        (0.1, 0.5),
        (0.5, 0.3),
        (-0.4, -0.25),
        (0.05, -0.4),
        (0.45, -0.35),
    ];
    const AMPLITUDES: [f64; 6] = [1.0, 0.8, 0.9, 0.85, 1.0, 0.75];
    CENTERS
        .iter()
        .zip(AMPLITUDES)
        .map(|(&c, a)| BumpSpec::new(c, 0.22, a))
        .collect()
}

/// Looks up a named preset.
pub fn preset(name: &str) -> Option<Vec<BumpSpec>> {
    (name == PAPER_SIX).then(paper_six)
}

/// Pointwise sum of the bumps at every node. Errors name the offending bump
/// by index.
pub fn render_phantom(specs: &[BumpSpec], grid: &Grid2D) -> Result<ScalarField> {
    for (i, b) in specs.iter().enumerate() {
        b.validate()
            .map_err(|e| Error::InvalidArgument(format!("bump {i}: {e}")))?;
    }
    Ok(ScalarField::from_fn(grid, |x, y| specs.iter().map(|b| b.eval(x, y)).sum()))
}

/// Adds seeded Gaussian white noise on Γ, rescaled so that
/// `‖noise‖₂ / ‖g‖₂ = level` exactly. Samples outside Γ stay zero.
pub fn add_noise(g: &BoundaryTrace, bspec: &BoundarySpec, level: f64, seed: u64) -> Result<BoundaryTrace> {
    if !(level.is_finite() && level >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise level must be non-negative, got {level}"
        )));
    }
    if level == 0.0 {
        return Ok(g.clone());
    }
    g.grid().ensure_same(bspec.grid(), "boundary spec")?;
    let norm = g.norm();
    if norm == 0.0 {
        return Err(Error::ZeroInput("cannot scale noise relative to an all-zero trace"));
    }
    let noise = white_noise(g, bspec, seed);
    let scale = level * norm / noise.norm();
    let mut out = g.clone();
    out.add_scaled(scale, &noise);
    Ok(out)
}

/// Unit-variance Gaussian samples on Γ, zero elsewhere.
pub fn white_noise(g: &BoundaryTrace, bspec: &BoundarySpec, seed: u64) -> BoundaryTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = BoundaryTrace::zeros(g.grid(), g.steps());
    let mask = bspec.gamma();
    for mut row in noise.samples_mut().rows_mut() {
        for (v, &on) in row.iter_mut().zip(mask) {
            if on {
                *v = StandardNormal.sample(&mut rng);
            }
        }
    }
    noise
}

/// Dice coefficient between the half-maximum supports of `estimate` and
/// `reference`, both thresholded at half the reference maximum. Interior
/// nodes only.
pub fn support_overlap(estimate: &ScalarField, reference: &ScalarField) -> Result<f64> {
    let grid = reference.grid();
    grid.ensure_same(estimate.grid(), "estimate")?;
    let level = 0.5 * reference.max();
    if !(level > 0.0) {
        return Err(Error::ZeroInput("reference has no positive maximum"));
    }
    let n = grid.n();
    let (e, r) = (estimate.values(), reference.values());
    let (mut both, mut total) = (0usize, 0usize);
    for i in 1..=n {
        for j in 1..=n {
            let (a, b) = (e[[i, j]] >= level, r[[i, j]] >= level);
            both += usize::from(a && b);
            total += usize::from(a) + usize::from(b);
        }
    }
    Ok(if total == 0 { 1.0 } else { 2.0 * both as f64 / total as f64 })
}

/// For each bump, the fraction of its own half-amplitude disk where
/// `estimate` also reaches half that amplitude.
pub fn inclusion_recovery(estimate: &ScalarField, specs: &[BumpSpec]) -> Vec<f64> {
    let grid = estimate.grid();
    let n = grid.n();
    let v = estimate.values();
    specs
        .iter()
        .map(|b| {
            let half = 0.5 * b.amplitude;
            let (mut hit, mut count) = (0usize, 0usize);
            for i in 1..=n {
                for j in 1..=n {
                    if b.eval(grid.coord(i), grid.coord(j)).abs() >= half.abs() {
                        count += 1;
                        hit += usize::from(v[[i, j]] * half.signum() >= half.abs());
                    }
                }
            }
            if count == 0 {
                0.0
            } else {
                hit as f64 / count as f64
            }
        })
        .collect()
}
