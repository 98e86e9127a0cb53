//! Exact solution of the unit-speed Neumann problem by expansion in the
//! Laplacian eigenfunctions `φ_{k,l} = cos(k x̄) cos(l ȳ)`,
//! `x̄ = π(x+1)/2`, with frequencies `(π/2)√(k²+l²)`.
//!
//! On cell-centred nodes the sampled eigenfunctions are discretely
//! orthogonal (the DCT-II relation), so the transform interpolates the
//! interior samples exactly. Evaluating the series on the boundary ring
//! gives the even reflection of the first interior row.
//!
//! This solver only synthesizes measurement data and reference solutions.
//! It shares no discretisation with [`crate::fdtd`].

use std::f64::consts::FRAC_PI_2;

use ndarray::{s, Array1, Array2, Zip};

use crate::boundary::{BoundarySpec, BoundaryTrace};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, StatePair};

/// Cosine coefficients `c_{k,l}`, `k, l < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoeffs {
    grid: Grid2D,
    coeffs: Array2<f64>,
}

impl CosineCoeffs {
    pub fn new(grid: &Grid2D, coeffs: Array2<f64>) -> Result<Self> {
        let n = grid.n();
        if coeffs.dim() != (n, n) {
            return Err(Error::Dimension {
                expected: n * n,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            grid: *grid,
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: *grid,
            coeffs: Array2::zeros((grid.n(), grid.n())),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coeffs
    }
}

/// Tolerance for deciding that a sound-speed field is identically one.
const UNIT_SPEED_TOL: f64 = 1e-12;

/// Cached eigenfunction samples for one grid.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    grid: Grid2D,
    /// `basis[[i, k]] = cos(k·π(x_i+1)/2)` for every node `i` of one axis.
    basis: Array2<f64>,
    /// `(π/2)√(k²+l²)`.
    freq: Array2<f64>,
}

impl SpectralSolver {
    pub fn new(grid: &Grid2D) -> Self {
        let n = grid.n();
        let basis = Array2::from_shape_fn((grid.side(), n), |(i, k)| {
            (k as f64 * FRAC_PI_2 * (grid.coord(i) + 1.0)).cos()
        });
        let freq = Array2::from_shape_fn((n, n), |(k, l)| {
            FRAC_PI_2 * ((k * k + l * l) as f64).sqrt()
        });
        Self {
            grid: *grid,
            basis,
            freq,
        }
    }

    /// Only unit sound speed has the closed-form eigenbasis.
    pub fn for_sound_speed(c: &ScalarField) -> Result<Self> {
        if c.values().iter().any(|&v| (v - 1.0).abs() > UNIT_SPEED_TOL) {
            return Err(Error::Unsupported(
                "the cosine-series solver requires unit sound speed",
            ));
        }
        Ok(Self::new(c.grid()))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Coefficients of the cosine interpolant of the interior samples. The
    /// boundary ring is not read.
    pub fn forward(&self, f: &ScalarField) -> Result<CosineCoeffs> {
        self.grid.ensure_same(f.grid(), "field")?;
        let n = self.grid.n();
        let inner = self.basis.slice(s![1..=n, ..]);
        let fi = f.values().slice(s![1..=n, 1..=n]);
        let mut c = inner.t().dot(&fi).dot(&inner);
        let scale = 1.0 / (n * n) as f64;
        for ((k, l), v) in c.indexed_iter_mut() {
            let wk = if k == 0 { 1.0 } else { 2.0 };
            let wl = if l == 0 { 1.0 } else { 2.0 };
            *v *= wk * wl * scale;
        }
        Ok(CosineCoeffs {
            grid: self.grid,
            coeffs: c,
        })
    }

    /// Sums the series at every node, boundary ring included.
    pub fn inverse(&self, c: &CosineCoeffs) -> Result<ScalarField> {
        self.grid.ensure_same(c.grid(), "coefficients")?;
        self.sum(&c.coeffs)
    }

    fn sum(&self, coeffs: &Array2<f64>) -> Result<ScalarField> {
        let values = self.basis.dot(coeffs).dot(&self.basis.t());
        ScalarField::from_array(&self.grid, values)
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        Ok(())
    }

    fn modulated(&self, c: &CosineCoeffs, g: impl Fn(f64) -> f64) -> Array2<f64> {
        let mut out = c.coeffs.clone();
        Zip::from(&mut out)
            .and(&self.freq)
            .for_each(|v, &lam| *v *= g(lam));
        out
    }

    /// `u(·, t) = Σ c_{k,l} φ_{k,l} cos(λ_{k,l} t)`: the solution with
    /// initial state `(f, 0)`.
    pub fn propagate(&self, c: &CosineCoeffs, t: f64) -> Result<ScalarField> {
        Self::check_time(t)?;
        self.grid.ensure_same(c.grid(), "coefficients")?;
        self.sum(&self.modulated(c, |lam| (lam * t).cos()))
    }

    /// Term-wise time derivative `−Σ c_{k,l} λ_{k,l} φ_{k,l} sin(λ_{k,l} t)`.
    pub fn velocity(&self, c: &CosineCoeffs, t: f64) -> Result<ScalarField> {
        Self::check_time(t)?;
        self.grid.ensure_same(c.grid(), "coefficients")?;
        self.sum(&self.modulated(c, |lam| -lam * (lam * t).sin()))
    }

    pub fn state(&self, c: &CosineCoeffs, t: f64) -> Result<StatePair> {
        Ok(StatePair {
            first: self.propagate(c, t)?,
            second: self.velocity(c, t)?,
        })
    }

    /// Boundary trace of the solution with initial state `(f, 0)` at
    /// `t_j = j·dt`, `j = 0..=T/dt`, zero outside Γ.
    pub fn synthesize(&self, f: &ScalarField, bspec: &BoundarySpec, t_final: f64) -> Result<BoundaryTrace> {
        self.grid.ensure_same(bspec.grid(), "boundary spec")?;
        let steps = self.grid.steps_for(t_final)?;
        let coeffs = self.forward(f)?;
        let s = self.grid.side();
        let len = self.grid.boundary_len();

        // Each wall row/column is basis · (C_t · φ(wall)) or its transpose.
        let first_row = self.basis.row(0).to_owned();
        let last_row = self.basis.row(s - 1).to_owned();
        let nodes: Vec<(usize, usize)> = (0..len).map(|k| self.grid.boundary_node(k)).collect();
        let mut samples = Array2::zeros((steps + 1, len));
        for j in 0..=steps {
            let t = j as f64 * self.grid.dt();
            let ct = self.modulated(&coeffs, |lam| (lam * t).cos());
            let bottom: Array1<f64> = self.basis.dot(&ct.dot(&first_row));
            let top: Array1<f64> = self.basis.dot(&ct.dot(&last_row));
            let left: Array1<f64> = self.basis.dot(&first_row.dot(&ct));
            let right: Array1<f64> = self.basis.dot(&last_row.dot(&ct));
            let mut row = samples.row_mut(j);
            for (k, &(ix, iy)) in nodes.iter().enumerate() {
                row[k] = if iy == 0 {
                    bottom[ix]
                } else if iy == s - 1 {
                    top[ix]
                } else if ix == 0 {
                    left[iy]
                } else {
                    right[iy]
                };
            }
        }
        BoundaryTrace::new(bspec, samples)
    }

    /// `𝔼(u₀, u₁) = Σ ∫φ²_{k,l} (λ²_{k,l} a²_{k,l} + b²_{k,l})` from the cosine
    /// coefficients `a` of `u₀` and `b` of `u₁` (unit sound speed).
    pub fn parseval_energy(&self, state: &StatePair) -> Result<f64> {
        let a = self.forward(&state.first)?;
        let b = self.forward(&state.second)?;
        let mut acc = 0.0;
        for (((k, l), &ak), &bk) in a.coeffs.indexed_iter().zip(b.coeffs.iter()) {
            // ∫_{-1}^{1} cos²(k x̄) dx is 2 for k = 0 and 1 otherwise
            let norm = if k == 0 { 2.0 } else { 1.0 } * if l == 0 { 2.0 } else { 1.0 };
            let lam = self.freq[[k, l]];
            acc += norm * (lam * lam * ak * ak + bk * bk);
        }
        Ok(acc)
    }
}

pub fn dct2_forward(f: &ScalarField) -> Result<CosineCoeffs> {
    SpectralSolver::new(f.grid()).forward(f)
}

pub fn dct2_inverse(c: &CosineCoeffs) -> Result<ScalarField> {
    SpectralSolver::new(c.grid()).inverse(c)
}

/// Series solution at time `t` for initial state `(f, 0)`, `f` given by its
/// coefficients. Fails unless `sound_speed ≡ 1`.
pub fn spectral_propagate(c: &CosineCoeffs, sound_speed: &ScalarField, t: f64) -> Result<ScalarField> {
    c.grid().ensure_same(sound_speed.grid(), "sound speed")?;
    SpectralSolver::for_sound_speed(sound_speed)?.propagate(c, t)
}

/// Measured data `g = u|_{Γ×[0,T]}` for initial state `(f, 0)`, sampled at
/// the grid time step. Fails unless `sound_speed ≡ 1`.
pub fn synthesize_data(
    f: &ScalarField,
    sound_speed: &ScalarField,
    bspec: &BoundarySpec,
    t_final: f64,
) -> Result<BoundaryTrace> {
    f.grid().ensure_same(sound_speed.grid(), "sound speed")?;
    SpectralSolver::for_sound_speed(sound_speed)?.synthesize(f, bspec, t_final)
}
