//! Time-reversal reconstruction: the one-shot estimate `ΠAg` and its
//! Neumann-series refinement `u⁽ᵏ⁺¹⁾ = u⁽ᵏ⁾ − ΠAΛ_T u⁽ᵏ⁾ + ΠAg`.
//!
//! Both `Λ_T` and `A` are the finite-difference solvers of [`crate::fdtd`],
//! so the iteration works with a matched discrete pair.

use crate::boundary::{BoundarySpec, BoundaryTrace};
use crate::error::{Error, Result};
use crate::fdtd::{dissipative_reverse_solve, forward_solve};
use crate::grid::{Grid2D, ScalarField, StatePair};
use crate::norms::{seminorm, Subspace};

#[derive(Debug, Clone)]
pub struct ReconConfig {
    /// Measurement time `T`.
    pub t_final: f64,
    /// Number of partial sums `k_max`; 0 returns the zero state.
    pub iterations: usize,
    pub subspace: Subspace,
    pub sound_speed: ScalarField,
    pub bspec: BoundarySpec,
    /// Keep every iterate in the report.
    pub record_history: bool,
}

impl ReconConfig {
    /// One-shot `Π₁Ag` with unit sound speed.
    pub fn new(bspec: &BoundarySpec, t_final: f64) -> Self {
        Self {
            t_final,
            iterations: 1,
            subspace: Subspace::H1,
            sound_speed: ScalarField::constant(bspec.grid(), 1.0),
            bspec: bspec.clone(),
            record_history: false,
        }
    }

    pub fn with_iterations(mut self, k: usize) -> Self {
        self.iterations = k;
        self
    }

    pub fn with_subspace(mut self, subspace: Subspace) -> Self {
        self.subspace = subspace;
        self
    }

    pub fn with_sound_speed(mut self, c: ScalarField) -> Self {
        self.sound_speed = c;
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.record_history = on;
        self
    }

    pub fn grid(&self) -> &Grid2D {
        self.bspec.grid()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "measurement time must be positive, got {}",
                self.t_final
            )));
        }
        self.grid().ensure_same(self.sound_speed.grid(), "sound speed")?;
        self.grid().steps_for(self.t_final)?;
        Ok(())
    }

    fn check_trace(&self, g: &BoundaryTrace) -> Result<()> {
        self.validate()?;
        self.grid().ensure_same(g.grid(), "trace")?;
        let steps = self.grid().steps_for(self.t_final)?;
        if g.steps() != steps {
            return Err(Error::Dimension {
                expected: steps + 1,
                found: g.n_times(),
            });
        }
        Ok(())
    }

    /// `ΠA`: time reversal followed by the projector.
    fn reverse_projected(&self, g: &BoundaryTrace) -> Result<StatePair> {
        let v = dissipative_reverse_solve(g, &self.sound_speed, &self.bspec)?;
        Ok(self.subspace.project(&v))
    }

    /// `ΠAΛ_T s`.
    fn round_trip(&self, s: &StatePair) -> Result<StatePair> {
        let trace = forward_solve(s, &self.sound_speed, &self.bspec, self.t_final)?.trace;
        self.reverse_projected(&trace)
    }
}

#[derive(Debug, Clone)]
pub struct ReconReport {
    /// `u⁽ᵏ_max⁾`.
    pub estimate: StatePair,
    /// Relative L² error of the first component of `u⁽¹⁾ … u⁽ᵏ_max⁾`, when a
    /// reference was supplied.
    pub per_iteration_errors: Option<Vec<f64>>,
    /// `err_{k+1} / err_k`.
    pub empirical_ratios: Vec<f64>,
    /// `u⁽¹⁾ … u⁽ᵏ_max⁾` when the config asked for history.
    pub iterates: Vec<StatePair>,
}

/// `u⁽¹⁾ = ΠAg`.
pub fn initial_approximation(g: &BoundaryTrace, cfg: &ReconConfig) -> Result<StatePair> {
    cfg.check_trace(g)?;
    cfg.reverse_projected(g)
}

/// Runs exactly `cfg.iterations` steps of the Neumann series starting from
/// `u⁽⁰⁾ = 0`.
pub fn neumann_iterate(g: &BoundaryTrace, cfg: &ReconConfig, reference: Option<&ScalarField>) -> Result<ReconReport> {
    cfg.check_trace(g)?;
    if let Some(r) = reference {
        cfg.grid().ensure_same(r.grid(), "reference")?;
    }
    let mut errors = reference.map(|_| Vec::with_capacity(cfg.iterations));
    let mut iterates = Vec::new();
    let mut u = StatePair::zeros(cfg.grid());
    if cfg.iterations > 0 {
        let b = cfg.reverse_projected(g)?;
        for k in 0..cfg.iterations {
            if k == 0 {
                u = b.clone();
            } else {
                let r = cfg.round_trip(&u)?;
                u.add_scaled(-1.0, &r);
                u.add_scaled(1.0, &b);
            }
            if let (Some(errs), Some(r)) = (errors.as_mut(), reference) {
                errs.push(u.first.relative_l2_error(r)?);
            }
            if cfg.record_history {
                iterates.push(u.clone());
            }
        }
    }
    let empirical_ratios = errors
        .as_deref()
        .map(|e| e.windows(2).map(|w| w[1] / w[0]).collect())
        .unwrap_or_default();
    Ok(ReconReport {
        estimate: u,
        per_iteration_errors: errors,
        empirical_ratios,
        iterates,
    })
}

/// `|(I − ΠAΛ_T)𝐟| / |𝐟|` in the energy seminorm, with `𝐟 = Π(f, 0)`.
pub fn estimate_contraction(f: &ScalarField, cfg: &ReconConfig) -> Result<f64> {
    cfg.validate()?;
    cfg.grid().ensure_same(f.grid(), "phantom")?;
    let s = cfg.subspace.project(&StatePair::from_position(f.clone()));
    let denom = seminorm(&s, &cfg.sound_speed)?;
    if denom == 0.0 {
        return Err(Error::ZeroInput("contraction of a state with zero energy"));
    }
    let mut residual = s.clone();
    residual.add_scaled(-1.0, &cfg.round_trip(&s)?);
    Ok(seminorm(&residual, &cfg.sound_speed)? / denom)
}

/// `(k, err_k)` for `k = 1 … k_max`.
pub fn error_history(report: &ReconReport) -> Result<Vec<(usize, f64)>> {
    let errs = report.per_iteration_errors.as_ref().ok_or(Error::MissingReference)?;
    Ok(errs.iter().enumerate().map(|(k, &e)| (k + 1, e)).collect())
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::norms::boundary_mean;
    use crate::phantom::{render_phantom, BumpSpec};
    use crate::spectral::synthesize_data;

    const T: f64 = 2.0;

    fn setup(n: usize) -> (Grid2D, BoundarySpec, ScalarField) {
        let g = Grid2D::new(n).unwrap();
        let b = BoundarySpec::full(&g);
        let f = render_phantom(&[BumpSpec::new((0.2, -0.1), 0.4, 1.0)], &g).unwrap();
        (g, b, f)
    }

    fn data(f: &ScalarField, b: &BoundarySpec) -> BoundaryTrace {
        synthesize_data(f, &ScalarField::constant(f.grid(), 1.0), b, T).unwrap()
    }

    fn random_trace(b: &BoundarySpec, steps: usize, seed: u64) -> BoundaryTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = b.grid().boundary_len();
        let s = Array2::from_shape_fn((steps + 1, len), |_| rng.random_range(-1.0..1.0));
        BoundaryTrace::new(b, s).unwrap()
    }

    #[test]
    fn zero_iterations_give_zero_state() {
        let (g, b, f) = setup(24);
        let cfg = ReconConfig::new(&b, T).with_iterations(0);
        let rep = neumann_iterate(&data(&f, &b), &cfg, Some(&f)).unwrap();
        assert_eq!(rep.estimate, StatePair::zeros(&g));
        assert!(error_history(&rep).unwrap().is_empty());
        assert!(rep.empirical_ratios.is_empty());
    }

    #[test]
    fn zero_data_gives_zero_state() {
        let (g, b, _) = setup(16);
        let cfg = ReconConfig::new(&b, T);
        let steps = g.steps_for(T).unwrap();
        let u = initial_approximation(&BoundaryTrace::zeros(&g, steps), &cfg).unwrap();
        assert_eq!(u, StatePair::zeros(&g));
    }

    #[test]
    fn one_iteration_is_initial_approximation() {
        let (_, b, f) = setup(24);
        let g = data(&f, &b);
        for sub in [Subspace::H0, Subspace::H1] {
            let cfg = ReconConfig::new(&b, T).with_subspace(sub);
            let rep = neumann_iterate(&g, &cfg, None).unwrap();
            assert_eq!(rep.estimate, initial_approximation(&g, &cfg).unwrap());
            assert!(rep.per_iteration_errors.is_none());
            assert!(matches!(error_history(&rep), Err(Error::MissingReference)));
        }
    }

    #[test]
    fn iterates_stay_in_subspace() {
        let (_, b, f) = setup(32);
        let g = data(&f, &b);
        for sub in [Subspace::H0, Subspace::H1] {
            let cfg = ReconConfig::new(&b, T).with_subspace(sub).with_iterations(3).with_history(true);
            let rep = neumann_iterate(&g, &cfg, Some(&f)).unwrap();
            assert_eq!(rep.iterates.len(), 3);
            assert_eq!(rep.per_iteration_errors.as_ref().unwrap().len(), 3);
            assert_eq!(rep.empirical_ratios.len(), 2);
            for u in &rep.iterates {
                assert!(boundary_mean(&u.first).abs() < 1e-10);
                if sub == Subspace::H1 {
                    assert!(u.second.values().iter().all(|&v| v == 0.0));
                }
            }
            assert_eq!(rep.iterates.last().unwrap(), &rep.estimate);
        }
    }

    #[test]
    fn converges_to_fixed_point_on_matched_data() {
        // data from the same discrete Λ_T: the fixed point is f itself
        let (_, b, f) = setup(48);
        let cfg = ReconConfig::new(&b, T).with_iterations(5);
        let g = forward_solve(&StatePair::from_position(f.clone()), &cfg.sound_speed, &b, T)
            .unwrap()
            .trace;
        let rep = neumann_iterate(&g, &cfg, Some(&f)).unwrap();
        let errs = rep.per_iteration_errors.unwrap();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[4] < 0.01);
    }

    #[test]
    fn reconstruction_is_linear() {
        let (g, b, _) = setup(20);
        let steps = g.steps_for(T).unwrap();
        let (g1, g2) = (random_trace(&b, steps, 1), random_trace(&b, steps, 2));
        let cfg = ReconConfig::new(&b, T).with_iterations(3);
        let mut combo = g1.clone();
        combo.add_scaled(-2.5, &g2);
        let lhs = neumann_iterate(&combo, &cfg, None).unwrap().estimate;
        let mut rhs = neumann_iterate(&g1, &cfg, None).unwrap().estimate;
        rhs.add_scaled(-2.5, &neumann_iterate(&g2, &cfg, None).unwrap().estimate);
        let diff = lhs.first.relative_l2_error(&rhs.first).unwrap();
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn contraction_is_scale_free() {
        let (_, b, f) = setup(32);
        let cfg = ReconConfig::new(&b, T);
        let r1 = estimate_contraction(&f, &cfg).unwrap();
        let r10 = estimate_contraction(&(&f * 10.0), &cfg).unwrap();
        assert!((r1 - r10).abs() < 1e-12, "{r1} {r10}");
        assert!(r1 > 0.0 && r1 < 1.0);
    }

    #[test]
    fn contraction_of_flat_field_is_undefined() {
        let (g, b, _) = setup(16);
        let cfg = ReconConfig::new(&b, T);
        assert!(matches!(
            estimate_contraction(&ScalarField::constant(&g, 2.0), &cfg),
            Err(Error::ZeroInput(_))
        ));
    }

    #[test]
    fn rejects_mismatched_traces() {
        let (g, b, f) = setup(16);
        let short = BoundaryTrace::zeros(&g, 3);
        let cfg = ReconConfig::new(&b, T);
        assert!(matches!(initial_approximation(&short, &cfg), Err(Error::Dimension { .. })));
        let bad = ReconConfig::new(&b, -1.0);
        assert!(neumann_iterate(&data(&f, &b), &bad, None).is_err());
        let other = Grid2D::new(17).unwrap();
        let r = ScalarField::zeros(&other);
        assert!(matches!(
            neumann_iterate(&data(&f, &b), &cfg, Some(&r)),
            Err(Error::GridMismatch(_))
        ));
    }
}
