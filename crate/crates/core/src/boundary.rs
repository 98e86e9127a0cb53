//! Observation surface Γ, the dissipation weight λ and boundary traces.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Which boundary nodes carry measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaPreset {
    /// Every boundary node.
    Full,
    /// Left column and bottom row. Includes the corners (−1,−1), (1,−1) and
    /// (−1,1); excludes (1,1).
    LeftBottom,
    /// Explicit canonical boundary indices.
    Nodes(Vec<usize>),
}

impl GammaPreset {
    pub fn name(&self) -> &'static str {
        match self {
            GammaPreset::Full => "full",
            GammaPreset::LeftBottom => "left_bottom",
            GammaPreset::Nodes(_) => "nodes",
        }
    }
}

/// λ on Γ: a constant, optionally tapered to zero with a half cosine over
/// `taper` arc length next to the ends of Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaProfile {
    pub value: f64,
    pub taper: Option<f64>,
}

impl Default for LambdaProfile {
    fn default() -> Self {
        Self {
            value: 1.0,
            taper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    grid: Grid2D,
    gamma: Vec<bool>,
    lambda: Vec<f64>,
}

impl BoundarySpec {
    /// Both vectors are in canonical boundary order. λ must be positive
    /// exactly on Γ and zero elsewhere.
    pub fn new(grid: &Grid2D, gamma: Vec<bool>, lambda: Vec<f64>) -> Result<Self> {
        let len = grid.boundary_len();
        for v in [gamma.len(), lambda.len()] {
            if v != len {
                return Err(Error::Dimension {
                    expected: len,
                    found: v,
                });
            }
        }
        for (k, (&on, &w)) in gamma.iter().zip(&lambda).enumerate() {
            let ok = if on { w.is_finite() && w > 0.0 } else { w == 0.0 };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "boundary node {k}: lambda = {w} inconsistent with gamma membership {on}"
                )));
            }
        }
        Ok(Self {
            grid: *grid,
            gamma,
            lambda,
        })
    }

    pub fn full(grid: &Grid2D) -> Self {
        Self::from_preset(grid, &GammaPreset::Full, LambdaProfile::default())
            .expect("full preset is always valid")
    }

    pub fn left_bottom(grid: &Grid2D) -> Self {
        Self::from_preset(grid, &GammaPreset::LeftBottom, LambdaProfile::default())
            .expect("left_bottom preset is always valid")
    }

    pub fn from_preset(grid: &Grid2D, preset: &GammaPreset, profile: LambdaProfile) -> Result<Self> {
        let len = grid.boundary_len();
        let s = grid.side();
        let gamma: Vec<bool> = match preset {
            GammaPreset::Full => vec![true; len],
            GammaPreset::LeftBottom => (0..len)
                .map(|k| {
                    let (i, j) = grid.boundary_node(k);
                    i == 0 || j == 0 || (i, j) == (0, s - 1)
                })
                .collect(),
            GammaPreset::Nodes(nodes) => {
                let mut mask = vec![false; len];
                for &k in nodes {
                    if k >= len {
                        return Err(Error::InvalidArgument(format!(
                            "boundary node index {k} out of range 0..{len}"
                        )));
                    }
                    mask[k] = true;
                }
                mask
            }
        };
        if !(profile.value.is_finite() && profile.value > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {}",
                profile.value
            )));
        }
        let lambda = match profile.taper {
            None => gamma
                .iter()
                .map(|&on| if on { profile.value } else { 0.0 })
                .collect(),
            Some(arc) => {
                if !(arc.is_finite() && arc > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "taper arc length must be positive, got {arc}"
                    )));
                }
                tapered(&gamma, profile.value, arc, grid.dx())
            }
        };
        Self::new(grid, gamma, lambda)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn gamma(&self) -> &[bool] {
        &self.gamma
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn in_gamma(&self, idx: usize) -> bool {
        self.gamma[idx]
    }

    pub fn is_full(&self) -> bool {
        self.gamma.iter().all(|&g| g)
    }
}

/// Half-cosine ramp in the arc distance to the nearest node outside Γ.
/// Nodes of Γ are at least one spacing away, so λ stays positive on Γ.
fn tapered(gamma: &[bool], value: f64, arc: f64, dx: f64) -> Vec<f64> {
    let len = gamma.len();
    let outside: Vec<usize> = (0..len).filter(|&k| !gamma[k]).collect();
    (0..len)
        .map(|k| {
            if !gamma[k] {
                return 0.0;
            }
            let Some(steps) = outside
                .iter()
                .map(|&m| {
                    let d = k.abs_diff(m);
                    d.min(len - d)
                })
                .min()
            else {
                return value;
            };
            let r = (steps as f64 * dx / arc).min(1.0);
            value * 0.5 * (1.0 - (std::f64::consts::PI * r).cos())
        })
        .collect()
}

fn standard(samples: Array2<f64>) -> Array2<f64> {
    if samples.is_standard_layout() {
        samples
    } else {
        samples.as_standard_layout().into_owned()
    }
}

/// Pressure samples `g(z, t_j)` at every boundary node for `t_j = j·dt`.
/// Row `j` is time level `j`; columns follow the canonical boundary order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    grid: Grid2D,
    samples: Array2<f64>,
}

impl BoundaryTrace {
    /// Wraps raw samples and zeroes every column outside Γ.
    pub fn new(bspec: &BoundarySpec, samples: Array2<f64>) -> Result<Self> {
        let mut samples = standard(samples);
        let len = bspec.grid.boundary_len();
        if samples.ncols() != len {
            return Err(Error::Dimension {
                expected: len,
                found: samples.ncols(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("trace contains non-finite values".into()));
        }
        for (k, &on) in bspec.gamma.iter().enumerate() {
            if !on {
                samples.column_mut(k).fill(0.0);
            }
        }
        Ok(Self {
            grid: bspec.grid,
            samples,
        })
    }

    /// Wraps samples as-is, e.g. data read from disk. Column count must match
    /// the grid.
    pub fn from_samples(grid: &Grid2D, samples: Array2<f64>) -> Result<Self> {
        let len = grid.boundary_len();
        if samples.ncols() != len {
            return Err(Error::Dimension {
                expected: len,
                found: samples.ncols(),
            });
        }
        Ok(Self {
            grid: *grid,
            samples: standard(samples),
        })
    }

    pub fn zeros(grid: &Grid2D, steps: usize) -> Self {
        Self {
            grid: *grid,
            samples: Array2::zeros((steps + 1, grid.boundary_len())),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Array2<f64> {
        &mut self.samples
    }

    /// Number of stored time levels (`steps + 1` for a solver trace).
    pub fn n_times(&self) -> usize {
        self.samples.nrows()
    }

    /// Number of time steps spanned; zero for an empty trace.
    pub fn steps(&self) -> usize {
        self.samples.nrows().saturating_sub(1)
    }

    pub fn t_final(&self) -> f64 {
        self.steps() as f64 * self.grid.dt()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let len = self.grid.boundary_len();
        let all = self.samples.as_slice().expect("traces are standard layout");
        &all[j * len..(j + 1) * len]
    }

    /// Euclidean norm over all samples.
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &BoundaryTrace) {
        assert_eq!(self.samples.dim(), other.samples.dim(), "trace shapes differ");
        self.samples.scaled_add(alpha, &other.samples);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_bottom_preset_membership() {
        let g = Grid2D::new(5).unwrap();
        let b = BoundarySpec::left_bottom(&g);
        let s = g.side();
        let at = |i: usize, j: usize| {
            let k = (0..g.boundary_len()).find(|&k| g.boundary_node(k) == (i, j)).unwrap();
            b.in_gamma(k)
        };
        assert!(at(0, 0));
        assert!(at(s - 1, 0));
        assert!(at(0, s - 1));
        assert!(!at(s - 1, s - 1));
        assert!(at(0, 3) && at(3, 0));
        assert!(!at(s - 1, 3) && !at(3, s - 1));
        let count = b.gamma().iter().filter(|&&x| x).count();
        assert_eq!(count, 2 * s - 1);
    }

    #[test]
    fn lambda_positive_exactly_on_gamma() {
        let g = Grid2D::new(8).unwrap();
        let tapered = BoundarySpec::from_preset(
            &g,
            &GammaPreset::LeftBottom,
            LambdaProfile {
                value: 1.0,
                taper: Some(0.5),
            },
        )
        .unwrap();
        for (&on, &w) in tapered.gamma().iter().zip(tapered.lambda()) {
            assert_eq!(on, w > 0.0);
            assert!(w <= 1.0);
        }
        // far from the ends of Γ the taper has reached the plateau
        assert_eq!(tapered.lambda()[2], 1.0);
        // one spacing (0.25) before the first node outside Γ: half way up the ramp
        assert!((tapered.lambda()[g.side() - 1] - 0.5).abs() < 1e-12);

        let bad = BoundarySpec::new(&g, vec![true; g.boundary_len()], vec![0.0; g.boundary_len()]);
        assert!(bad.is_err());
        let short = BoundarySpec::new(&g, vec![true; 3], vec![1.0; 3]);
        assert!(matches!(short, Err(Error::Dimension { .. })));
    }

    #[test]
    fn trace_zeroed_outside_gamma() {
        let g = Grid2D::new(4).unwrap();
        let b = BoundarySpec::left_bottom(&g);
        let t = BoundaryTrace::new(&b, Array2::ones((3, g.boundary_len()))).unwrap();
        for j in 0..3 {
            for (k, &v) in t.row(j).iter().enumerate() {
                assert_eq!(v, if b.in_gamma(k) { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(t.steps(), 2);
    }
}
