//! Grid geometry and the field containers shared by every solver.
//!
//! The square `[-1,1]²` is split into `n × n` cells of width `dx = 2/n`; the
//! computational nodes sit at the cell centres. One extra ring of nodes lies
//! half a cell outside each wall. The Neumann fill and the dissipative
//! boundary update act on that ring, so the effective wall sits exactly
//! midway between the ring and the first interior row, i.e. on `x = ±1`.
//!
//! Arrays are therefore `(n+2) × (n+2)`. Node `(i, j)` is at
//! `(x_i, y_j)` with `x_i = -1 + (i - ½)·dx`; interior nodes are `1..=n` in
//! each direction.

use std::ops::{Add, Mul, Sub};

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};

/// Default ratio `dt/dx`.
pub const DEFAULT_DT_FACTOR: f64 = 0.5;

/// Relative slack allowed when checking that `T/dt` is an integer.
const STEP_COUNT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    dx: f64,
    dt: f64,
}

impl Grid2D {
    /// `n` interior cells per side with the default time step `0.5·dx`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dt_factor(n, DEFAULT_DT_FACTOR)
    }

    pub fn with_dt_factor(n: usize, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt factor must be positive, got {factor}"
            )));
        }
        let dx = Self::spacing(n)?;
        Self::with_time_step(n, factor * dx)
    }

    pub fn with_time_step(n: usize, dt: f64) -> Result<Self> {
        let dx = Self::spacing(n)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        Ok(Self { n, dx, dt })
    }

    /// Largest time step not exceeding `factor·dx` that divides `t_final`
    /// into a whole number of steps.
    pub fn fitted(n: usize, factor: f64, t_final: f64) -> Result<Self> {
        let nominal = Self::with_dt_factor(n, factor)?;
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let ratio = t_final / nominal.dt;
        let steps = if (ratio - ratio.round()).abs() <= STEP_COUNT_RTOL * ratio {
            ratio.round()
        } else {
            ratio.ceil()
        };
        Self::with_time_step(n, t_final / steps.max(1.0))
    }

    fn spacing(n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 cells per side, got {n}"
            )));
        }
        Ok(2.0 / n as f64)
    }

    /// Interior cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes per side, boundary ring included.
    pub fn side(&self) -> usize {
        self.n + 2
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + (i as f64 - 0.5) * self.dx
    }

    /// Number of time steps covering `[0, t_final]`; fails unless `t_final`
    /// is a whole multiple of `dt`.
    pub fn steps_for(&self, t_final: f64) -> Result<usize> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        let ratio = t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > STEP_COUNT_RTOL * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::StepCount {
                t_final,
                dt: self.dt,
            });
        }
        Ok(steps as usize)
    }

    /// Stability bound `dt ≤ dx / (√2 · max c)` of the 2D leapfrog scheme.
    pub fn check_cfl(&self, sound_speed: &ScalarField) -> Result<()> {
        self.ensure_same(sound_speed.grid(), "sound speed")?;
        let cmax = sound_speed
            .values()
            .iter()
            .fold(0.0_f64, |m, &c| m.max(c.abs()));
        if cmax == 0.0 {
            return Ok(());
        }
        let limit = self.dx / (std::f64::consts::SQRT_2 * cmax);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &Grid2D, what: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(what))
        }
    }

    /// Length of the canonical boundary enumeration, `4·side − 4`.
    pub fn boundary_len(&self) -> usize {
        4 * self.side() - 4
    }

    /// Array index `(i, j)` of canonical boundary node `idx`.
    ///
    /// The walk starts at the bottom-left corner, runs along the bottom row
    /// to the right, up the right column, leftwards along the top row and
    /// down the left column. Each corner appears once.
    pub fn boundary_node(&self, idx: usize) -> (usize, usize) {
        let s = self.side();
        assert!(idx < self.boundary_len(), "boundary index {idx} out of range");
        if idx < s {
            (idx, 0)
        } else if idx < 2 * s - 1 {
            (s - 1, idx - s + 1)
        } else if idx < 3 * s - 2 {
            (s - 2 - (idx - (2 * s - 1)), s - 1)
        } else {
            (0, s - 2 - (idx - (3 * s - 2)))
        }
    }

    /// The side that owns node `idx` for boundary-condition updates. Corners
    /// go to the first side in the order bottom, right, top, left.
    pub fn boundary_side(&self, idx: usize) -> Side {
        let s = self.side();
        if idx < s {
            Side::Bottom
        } else if idx < 2 * s - 1 {
            Side::Right
        } else if idx < 3 * s - 2 {
            Side::Top
        } else {
            Side::Left
        }
    }

    pub fn is_corner(&self, idx: usize) -> bool {
        let s = self.side();
        idx == 0 || idx == s - 1 || idx == 2 * s - 2 || idx == 3 * s - 3
    }

    /// Neighbour one step along the inward normal of the owning side.
    pub fn inward_neighbor(&self, idx: usize) -> (usize, usize) {
        let (i, j) = self.boundary_node(idx);
        match self.boundary_side(idx) {
            Side::Bottom => (i, j + 1),
            Side::Right => (i - 1, j),
            Side::Top => (i, j - 1),
            Side::Left => (i + 1, j),
        }
    }

    /// Boundary indices with all non-corner nodes first, then the four
    /// corners; corner updates read side nodes that must already be final.
    pub(crate) fn update_order(&self) -> Vec<usize> {
        let len = self.boundary_len();
        (0..len)
            .filter(|&k| !self.is_corner(k))
            .chain((0..len).filter(|&k| self.is_corner(k)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// One real value per node, boundary ring included.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid2D, value: f64) -> Self {
        let s = grid.side();
        Self {
            grid: *grid,
            values: Array2::from_elem((s, s), value),
        }
    }

    /// Samples `f(x, y)` at every node, boundary ring included.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let s = grid.side();
        let values = Array2::from_shape_fn((s, s), |(i, j)| f(grid.coord(i), grid.coord(j)));
        Self {
            grid: *grid,
            values,
        }
    }

    pub fn from_array(grid: &Grid2D, values: Array2<f64>) -> Result<Self> {
        let s = grid.side();
        if values.dim() != (s, s) {
            return Err(Error::Dimension {
                expected: s * s,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(Self {
            grid: *grid,
            values,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("fields are standard layout")
    }

    pub(crate) fn as_slice_mut(&mut self) -> &mut [f64] {
        self.values.as_slice_mut().expect("fields are standard layout")
    }

    /// `L²(Ω)` norm by the midpoint rule over the interior nodes.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid.n;
        let interior = self.values.slice(ndarray::s![1..=n, 1..=n]);
        (interior.iter().map(|v| v * v).sum::<f64>()).sqrt() * self.grid.dx
    }

    /// `‖self − reference‖ / ‖reference‖` in `L²(Ω)`.
    pub fn relative_l2_error(&self, reference: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&reference.grid, "reference field")?;
        let denom = reference.l2_norm();
        if denom == 0.0 {
            return Err(Error::ZeroInput("reference field has zero L2 norm"));
        }
        Ok((self - reference).l2_norm() / denom)
    }

    /// Values at the boundary ring in canonical order.
    pub fn boundary_values(&self) -> Vec<f64> {
        (0..self.grid.boundary_len())
            .map(|k| self.values[self.grid.boundary_node(k)])
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `self += alpha · other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &ScalarField) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Zip::from(&mut self.values)
            .and(&other.values)
            .for_each(|a, &b| *a += alpha * b);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;

    fn add(self, rhs: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;

    fn sub(self, rhs: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;

    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|v| v * rhs)
    }
}

/// An element `(u₀, u₁)` of the state space: position and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub first: ScalarField,
    pub second: ScalarField,
}

impl StatePair {
    pub fn new(first: ScalarField, second: ScalarField) -> Result<Self> {
        first.grid.ensure_same(&second.grid, "state components")?;
        Ok(Self { first, second })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            first: ScalarField::zeros(grid),
            second: ScalarField::zeros(grid),
        }
    }

    /// `(f, 0)`: the photoacoustic initial state.
    pub fn from_position(first: ScalarField) -> Self {
        let second = ScalarField::zeros(first.grid());
        Self { first, second }
    }

    pub fn grid(&self) -> &Grid2D {
        self.first.grid()
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &StatePair) {
        self.first.add_scaled(alpha, &other.first);
        self.second.add_scaled(alpha, &other.second);
    }

    pub fn scaled(&self, alpha: f64) -> StatePair {
        StatePair {
            first: &self.first * alpha,
            second: &self.second * alpha,
        }
    }
}

impl Sub for &StatePair {
    type Output = StatePair;

    fn sub(self, rhs: &StatePair) -> StatePair {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Add for &StatePair {
    type Output = StatePair;

    fn add(self, rhs: &StatePair) -> StatePair {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}
