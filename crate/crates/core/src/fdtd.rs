//! Leapfrog solvers: the measurement operator `Λ_T` (forward in time,
//! reflecting walls) and the time-reversal operator `A` (backward in time,
//! dissipative boundary driven by the data).
//!
//! Interior nodes use the second-order five-point/three-level stencil
//!
//! ```text
//! u^{j±1} = 2u^j − u^{j∓1} + (c·dt/dx)² (u_E + u_W + u_N + u_S − 4u)^j
//! ```
//!
//! Forward, every boundary-ring node copies its inward neighbour (two-point
//! Neumann stencil). Backward, the ring solves the two-point discretisation
//! of `∂_ν v − λ v_t = −λ g_t`:
//!
//! ```text
//! v₀^{j−1} = [v₁^{j−1} + γ (v₀^j − g^j + g^{j−1})] / (1 + γ),   γ = λ·dx/dt
//! ```
//!
//! where `v₁` is the inward neighbour. The interior of a level is always
//! finished before its ring is updated, and side nodes before corners.

use crate::boundary::{BoundarySpec, BoundaryTrace};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, StatePair};

/// Boundary trace and terminal state of a forward solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub trace: BoundaryTrace,
    pub final_state: StatePair,
}

/// Flat-index view of the boundary ring.
struct Ring {
    /// Canonical indices in update order (corners last).
    order: Vec<usize>,
    /// Flat array index of each canonical boundary node.
    node: Vec<usize>,
    /// Flat array index of its inward neighbour.
    inward: Vec<usize>,
}

impl Ring {
    fn new(grid: &Grid2D) -> Self {
        let s = grid.side();
        let len = grid.boundary_len();
        let flat = |(i, j): (usize, usize)| i * s + j;
        Self {
            order: grid.update_order(),
            node: (0..len).map(|k| flat(grid.boundary_node(k))).collect(),
            inward: (0..len).map(|k| flat(grid.inward_neighbor(k))).collect(),
        }
    }

    fn fill(&self, u: &mut [f64]) {
        for &k in &self.order {
            u[self.node[k]] = u[self.inward[k]];
        }
    }

    /// Dissipative update of level `next` (time `t_{j−1}`) from level `curr`
    /// (time `t_j`).
    fn dissipate(&self, next: &mut [f64], curr: &[f64], g_next: &[f64], g_curr: &[f64], gamma: &[f64]) {
        for &k in &self.order {
            let node = self.node[k];
            next[node] = dissipative_node_value(
                next[self.inward[k]],
                curr[node],
                g_curr[k],
                g_next[k],
                gamma[k],
            );
        }
    }

    fn record(&self, u: &[f64], gamma_mask: &[bool], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = if gamma_mask[k] { u[self.node[k]] } else { 0.0 };
        }
    }
}

/// `(c·dt/dx)²` at every node.
fn courant_squared(grid: &Grid2D, c: &ScalarField) -> Vec<f64> {
    let r = grid.dt() / grid.dx();
    c.as_slice().iter().map(|&v| (v * r) * (v * r)).collect()
}

/// Interior leapfrog update written over `prev`:
/// `prev ← 2·curr − prev + coef·Δcurr`. Ring entries are untouched.
fn leapfrog_in_place(prev: &mut [f64], curr: &[f64], coef: &[f64], side: usize) {
    for i in 1..side - 1 {
        let row = i * side;
        for idx in row + 1..row + side - 1 {
            let c = curr[idx];
            let lap = curr[idx + side] + curr[idx - side] + curr[idx + 1] + curr[idx - 1] - 4.0 * c;
            prev[idx] = 2.0 * c - prev[idx] + coef[idx] * lap;
        }
    }
}

/// Second-order Taylor start `u₀ + sign·dt·u₁ + ½·coef·Δu₀` at interior
/// nodes. The ring of `out` is zeroed.
fn taylor_start(out: &mut [f64], u0: &[f64], u1: &[f64], coef: &[f64], dt: f64, side: usize) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 1..side - 1 {
        let row = i * side;
        for idx in row + 1..row + side - 1 {
            let c = u0[idx];
            let lap = u0[idx + side] + u0[idx - side] + u0[idx + 1] + u0[idx - 1] - 4.0 * c;
            out[idx] = c + dt * u1[idx] + 0.5 * coef[idx] * lap;
        }
    }
}

fn field(grid: &Grid2D, data: &[f64]) -> ScalarField {
    let mut f = ScalarField::zeros(grid);
    f.as_slice_mut().copy_from_slice(data);
    f
}

/// Next (or, by symmetry, previous) time level at interior nodes from two
/// consecutive levels. Ring nodes of the result are zero; filling them is
/// the boundary step's job.
pub fn interior_step(prev: &ScalarField, curr: &ScalarField, c: &ScalarField) -> Result<ScalarField> {
    let grid = prev.grid();
    grid.ensure_same(curr.grid(), "time levels")?;
    grid.ensure_same(c.grid(), "sound speed")?;
    let coef = courant_squared(grid, c);
    let mut out = prev.as_slice().to_vec();
    leapfrog_in_place(&mut out, curr.as_slice(), &coef, grid.side());
    let mut next = field(grid, &out);
    let ring = Ring::new(grid);
    for &node in &ring.node {
        next.as_slice_mut()[node] = 0.0;
    }
    Ok(next)
}

/// Energy of the leapfrog scheme between consecutive levels `earlier = u^j`
/// and `later = u^{j+1}`:
/// `Σ c⁻² ((u^{j+1} − u^j)/dt)² dx² + Σ_edges δu^{j+1}·δu^j`,
/// the kinetic sum over interior nodes and the edge sum over every edge with
/// an interior endpoint. The Neumann fill conserves it exactly and the
/// dissipative update never increases it, unlike the centred-velocity
/// quadrature of [`crate::norms::energy`], which oscillates at `O((ω·dt)²)`.
pub fn leapfrog_energy(later: &ScalarField, earlier: &ScalarField, c: &ScalarField) -> Result<f64> {
    let grid = later.grid();
    grid.ensure_same(earlier.grid(), "time levels")?;
    grid.ensure_same(c.grid(), "sound speed")?;
    let n = grid.n();
    let (a, b, cv) = (later.values(), earlier.values(), c.values());
    let mut kinetic = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            let d = (a[[i, j]] - b[[i, j]]) / (grid.dt() * cv[[i, j]]);
            kinetic += d * d;
        }
    }
    let mut potential = 0.0;
    for i in 0..=n {
        for j in 1..=n {
            potential += (a[[i + 1, j]] - a[[i, j]]) * (b[[i + 1, j]] - b[[i, j]]);
            potential += (a[[j, i + 1]] - a[[j, i]]) * (b[[j, i + 1]] - b[[j, i]]);
        }
    }
    Ok(kinetic * grid.dx() * grid.dx() + potential)
}

/// Copies each inward neighbour onto its boundary node.
pub fn neumann_fill(u: &mut ScalarField) {
    let ring = Ring::new(u.grid());
    ring.fill(u.as_slice_mut());
}

/// `γ = λ·dx/dt` per canonical boundary node.
pub fn gamma_weights(bspec: &BoundarySpec) -> Vec<f64> {
    let g = bspec.grid();
    let r = g.dx() / g.dt();
    bspec.lambda().iter().map(|&l| l * r).collect()
}

/// Single-node form of the dissipative boundary update: value at time
/// `t_{j−1}` from the freshly computed inward neighbour at `t_{j−1}`, the
/// node's own value at `t_j`, and the data at both times.
pub fn dissipative_node_value(inward_next: f64, node_curr: f64, g_curr: f64, g_next: f64, gamma: f64) -> f64 {
    (inward_next + gamma * (node_curr - g_curr + g_next)) / (1.0 + gamma)
}

/// Sets the boundary ring of `next` (level `t_{j−1}`, interior already
/// computed) from `curr` (level `t_j`) and the data rows `g(t_{j−1})`,
/// `g(t_j)`. Nodes with λ = 0 reduce to the Neumann fill.
pub fn dissipative_boundary_update(
    next: &mut ScalarField,
    curr: &ScalarField,
    g_next: &[f64],
    g_curr: &[f64],
    bspec: &BoundarySpec,
) -> Result<()> {
    let grid = *bspec.grid();
    grid.ensure_same(next.grid(), "next level")?;
    grid.ensure_same(curr.grid(), "current level")?;
    let len = grid.boundary_len();
    for row in [g_next.len(), g_curr.len()] {
        if row != len {
            return Err(Error::Dimension {
                expected: len,
                found: row,
            });
        }
    }
    let gamma = gamma_weights(bspec);
    Ring::new(&grid).dissipate(next.as_slice_mut(), curr.as_slice(), g_next, g_curr, &gamma);
    Ok(())
}

fn check_inputs(grid: &Grid2D, c: &ScalarField, bspec: &BoundarySpec) -> Result<()> {
    grid.ensure_same(c.grid(), "sound speed")?;
    grid.ensure_same(bspec.grid(), "boundary spec")?;
    if c.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("sound speed must be strictly positive".into()));
    }
    grid.check_cfl(c)
}

/// `Λ_T`: solves the reflecting-wall problem from `s0` up to `t_final` and
/// records the trace on Γ at every step.
pub fn forward_solve(s0: &StatePair, c: &ScalarField, bspec: &BoundarySpec, t_final: f64) -> Result<SolveResult> {
    forward_solve_observed(s0, c, bspec, t_final, usize::MAX, |_, _| {})
}

/// [`forward_solve`] that also reports `(u^j, u_t^j)` to `observer` at every
/// step `j` divisible by `every`, and at the final step. Velocities are
/// centred differences except at the two ends.
pub fn forward_solve_observed(
    s0: &StatePair,
    c: &ScalarField,
    bspec: &BoundarySpec,
    t_final: f64,
    every: usize,
    mut observer: impl FnMut(usize, &StatePair),
) -> Result<SolveResult> {
    let grid = *s0.grid();
    check_inputs(&grid, c, bspec)?;
    let steps = grid.steps_for(t_final)?;
    let every = every.max(1);
    let side = grid.side();
    let dt = grid.dt();
    let coef = courant_squared(&grid, c);
    let ring = Ring::new(&grid);
    let mask = bspec.gamma();
    let len = grid.boundary_len();

    let mut trace = BoundaryTrace::zeros(&grid, steps);
    let record = |u: &[f64], trace: &mut BoundaryTrace, j: usize| {
        let row = &mut trace.samples_mut().as_slice_mut().expect("standard layout")[j * len..(j + 1) * len];
        ring.record(u, mask, row);
    };

    observer(0, s0);
    let mut prev = s0.first.as_slice().to_vec();
    record(&prev, &mut trace, 0);
    let mut curr = vec![0.0; prev.len()];
    taylor_start(&mut curr, &prev, s0.second.as_slice(), &coef, dt, side);
    ring.fill(&mut curr);
    record(&curr, &mut trace, 1);

    // levels j−1, j held in prev, curr; `older` keeps j−2 for the final
    // one-sided velocity
    let mut older = vec![0.0; prev.len()];
    for j in 1..steps {
        older.copy_from_slice(&prev);
        leapfrog_in_place(&mut prev, &curr, &coef, side);
        ring.fill(&mut prev);
        std::mem::swap(&mut prev, &mut curr);
        // now prev = u^j, curr = u^{j+1}, older = u^{j−1}
        record(&curr, &mut trace, j + 1);
        if j % every == 0 {
            let vel: Vec<f64> = curr.iter().zip(&older).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
            observer(j, &StatePair {
                first: field(&grid, &prev),
                second: field(&grid, &vel),
            });
        }
    }

    // prev = u^{N−1}, curr = u^N, older = u^{N−2} (when N ≥ 2)
    let vel: Vec<f64> = if steps >= 2 {
        (0..curr.len())
            .map(|i| (3.0 * curr[i] - 4.0 * prev[i] + older[i]) / (2.0 * dt))
            .collect()
    } else {
        curr.iter().zip(&prev).map(|(a, b)| (a - b) / dt).collect()
    };
    let final_state = StatePair {
        first: field(&grid, &curr),
        second: field(&grid, &vel),
    };
    observer(steps, &final_state);
    Ok(SolveResult { trace, final_state })
}

/// `A g = (v(·,0), v_t(·,0))`: backward solve from zero terminal data with
/// the dissipative boundary condition driven by `g`.
pub fn dissipative_reverse_solve(g: &BoundaryTrace, c: &ScalarField, bspec: &BoundarySpec) -> Result<StatePair> {
    dissipative_reverse_solve_observed(g, c, bspec, usize::MAX, |_, _| {})
}

/// [`dissipative_reverse_solve`] reporting `(v^j, v_t^j)` at every step
/// divisible by `every` and at `j = 0`.
pub fn dissipative_reverse_solve_observed(
    g: &BoundaryTrace,
    c: &ScalarField,
    bspec: &BoundarySpec,
    every: usize,
    observer: impl FnMut(usize, &StatePair),
) -> Result<StatePair> {
    let grid = *g.grid();
    check_inputs(&grid, c, bspec)?;
    if g.steps() == 0 {
        return Err(Error::InvalidArgument("trace must span at least one time step".into()));
    }
    reverse(&grid, None, Some(g), g.steps(), c, bspec, every, observer)
}

/// Backward dissipative dynamics with zero data from the terminal state
/// `(v(·,T), v_t(·,T)) = terminal`.
pub fn dissipative_evolve(
    terminal: &StatePair,
    c: &ScalarField,
    bspec: &BoundarySpec,
    t_final: f64,
    every: usize,
    observer: impl FnMut(usize, &StatePair),
) -> Result<StatePair> {
    let grid = *terminal.grid();
    check_inputs(&grid, c, bspec)?;
    let steps = grid.steps_for(t_final)?;
    reverse(&grid, Some(terminal), None, steps, c, bspec, every, observer)
}

#[allow(clippy::too_many_arguments)]
fn reverse(
    grid: &Grid2D,
    terminal: Option<&StatePair>,
    g: Option<&BoundaryTrace>,
    steps: usize,
    c: &ScalarField,
    bspec: &BoundarySpec,
    every: usize,
    mut observer: impl FnMut(usize, &StatePair),
) -> Result<StatePair> {
    let every = every.max(1);
    let side = grid.side();
    let dt = grid.dt();
    let coef = courant_squared(grid, c);
    let ring = Ring::new(grid);
    let gamma = gamma_weights(bspec);
    let zero_row = vec![0.0; grid.boundary_len()];
    let row = |j: usize| -> &[f64] {
        match g {
            Some(g) => g.row(j),
            None => &zero_row,
        }
    };

    let size = side * side;
    let zeros = vec![0.0; size];
    let (w0, w1) = match terminal {
        Some(s) => (s.first.as_slice(), s.second.as_slice()),
        None => (&zeros[..], &zeros[..]),
    };
    observer(steps, &StatePair {
        first: field(grid, w0),
        second: field(grid, w1),
    });

    // `upper` holds level j+1 and `mid` level j while computing j−1
    let mut upper = w0.to_vec();
    let mut mid = vec![0.0; size];
    // backward Taylor start: the velocity term changes sign
    let neg_w1: Vec<f64> = w1.iter().map(|v| -v).collect();
    taylor_start(&mut mid, w0, &neg_w1, &coef, dt, side);
    ring.dissipate(&mut mid, &upper, row(steps - 1), row(steps), &gamma);

    let mut level2 = if steps == 2 { upper.clone() } else { Vec::new() };
    let mut above = Vec::new();
    for j in (1..steps).rev() {
        let observe = j % every == 0;
        if observe {
            above.clone_from(&upper);
        }
        leapfrog_in_place(&mut upper, &mid, &coef, side);
        ring.dissipate(&mut upper, &mid, row(j - 1), row(j), &gamma);
        // upper = v^{j−1}, mid = v^j
        if observe {
            let vel: Vec<f64> = above.iter().zip(&upper).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
            observer(j, &StatePair {
                first: field(grid, &mid),
                second: field(grid, &vel),
            });
        }
        std::mem::swap(&mut upper, &mut mid);
        if j == 2 {
            level2.clone_from(&upper);
        }
    }
    // mid = v^0, upper = v^1
    let (v0, v1) = (mid, upper);
    let vel: Vec<f64> = if steps >= 2 {
        (0..size)
            .map(|i| (-3.0 * v0[i] + 4.0 * v1[i] - level2[i]) / (2.0 * dt))
            .collect()
    } else {
        v1.iter().zip(&v0).map(|(a, b)| (a - b) / dt).collect()
    };
    let out = StatePair {
        first: field(grid, &v0),
        second: field(grid, &vel),
    };
    observer(0, &out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::energy;
    use crate::synthetic::{random_smooth_field, random_smooth_state};

    fn unit(g: &Grid2D) -> ScalarField {
        ScalarField::constant(g, 1.0)
    }

    fn max_abs(f: &ScalarField) -> f64 {
        f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn interior_step_trivial_levels() {
        let g = Grid2D::new(10).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(max_abs(&interior_step(&z, &z, &unit(&g)).unwrap()), 0.0);
        let k = ScalarField::constant(&g, 2.5);
        let next = interior_step(&k, &k, &unit(&g)).unwrap();
        let n = g.n();
        for i in 1..=n {
            for j in 1..=n {
                assert_eq!(next.values()[[i, j]], 2.5);
            }
        }
    }

    #[test]
    fn interior_step_impulse_matches_hand_expansion() {
        let g = Grid2D::new(10).unwrap();
        let c = ScalarField::constant(&g, 0.8);
        let mut curr = ScalarField::zeros(&g);
        let amp = 1.7;
        curr.values_mut()[[4, 6]] = amp;
        let next = interior_step(&ScalarField::zeros(&g), &curr, &c).unwrap();
        let r2 = (0.8 * g.dt() / g.dx()).powi(2);
        let v = next.values();
        assert!((v[[4, 6]] - (2.0 - 4.0 * r2) * amp).abs() < 1e-15);
        for (i, j) in [(3, 6), (5, 6), (4, 5), (4, 7)] {
            assert!((v[[i, j]] - r2 * amp).abs() < 1e-15);
        }
        let nonzero = v.iter().filter(|&&x| x != 0.0).count();
        assert_eq!(nonzero, 5);
    }

    #[test]
    fn stencil_is_time_reversible() {
        let g = Grid2D::new(20).unwrap();
        let c = unit(&g);
        let u0 = random_smooth_field(&g, 1);
        let u1 = random_smooth_field(&g, 2);
        let u2 = interior_step(&u0, &u1, &c).unwrap();
        let back = interior_step(&u2, &u1, &c).unwrap();
        let n = g.n();
        for i in 1..=n {
            for j in 1..=n {
                assert!((back.values()[[i, j]] - u0.values()[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dissipative_update_hand_example() {
        // γ = λ·dx/dt = 2 for λ = 1, dt = dx/2
        let v = dissipative_node_value(0.4, 0.1, 0.3, 0.6, 2.0);
        assert!((v - 0.4).abs() < 1e-15);
        // λ = 0 is the Neumann fill
        assert_eq!(dissipative_node_value(0.123, 9.0, 4.0, -2.0, 0.0), 0.123);
        // steady state
        let k = 0.77;
        assert!((dissipative_node_value(k, k, 0.5, 0.5, 2.0) - k).abs() < 1e-15);

        let g = Grid2D::new(6).unwrap();
        let b = BoundarySpec::full(&g);
        assert!((gamma_weights(&b)[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_update_on_fields() {
        let g = Grid2D::new(6).unwrap();
        let lb = BoundarySpec::left_bottom(&g);
        let mut next = random_smooth_field(&g, 3);
        let curr = random_smooth_field(&g, 4);
        let len = g.boundary_len();
        let g_next = vec![0.6; len];
        let g_curr = vec![0.3; len];
        let before = next.clone();
        dissipative_boundary_update(&mut next, &curr, &g_next, &g_curr, &lb).unwrap();
        let gamma = gamma_weights(&lb);
        for k in g.update_order() {
            let node = g.boundary_node(k);
            let inward = next.values()[g.inward_neighbor(k)];
            let expect = if lb.in_gamma(k) {
                dissipative_node_value(inward, curr.values()[node], 0.3, 0.6, gamma[k])
            } else {
                inward
            };
            assert!((next.values()[node] - expect).abs() < 1e-14);
        }
        // interior untouched
        for i in 1..=g.n() {
            for j in 1..=g.n() {
                assert_eq!(next.values()[[i, j]], before.values()[[i, j]]);
            }
        }
        assert!(dissipative_boundary_update(&mut next, &curr, &g_next[1..], &g_curr, &lb).is_err());
    }

    #[test]
    fn zero_initial_state_gives_zero_solution() {
        let g = Grid2D::new(16).unwrap();
        let res = forward_solve(&StatePair::zeros(&g), &unit(&g), &BoundarySpec::full(&g), 1.0).unwrap();
        assert!(res.trace.samples().iter().all(|&v| v == 0.0));
        assert_eq!(res.final_state, StatePair::zeros(&g));
        assert_eq!(res.trace.n_times(), g.steps_for(1.0).unwrap() + 1);
    }

    #[test]
    fn constants_are_exact_solutions() {
        let g = Grid2D::new(16).unwrap();
        let lb = BoundarySpec::left_bottom(&g);
        let s0 = StatePair::from_position(ScalarField::constant(&g, 1.0));
        let res = forward_solve(&s0, &unit(&g), &lb, 5.0).unwrap();
        for j in 0..res.trace.n_times() {
            for (k, &v) in res.trace.row(j).iter().enumerate() {
                let expect = if lb.in_gamma(k) { 1.0 } else { 0.0 };
                assert!((v - expect).abs() <= 1e-13);
            }
        }
        assert!(res.final_state.first.values().iter().all(|&v| (v - 1.0).abs() <= 1e-13));
        assert!(max_abs(&res.final_state.second) <= 1e-10);
    }

    #[test]
    fn zero_data_reverse_is_zero() {
        let g = Grid2D::new(16).unwrap();
        let b = BoundarySpec::full(&g);
        let trace = BoundaryTrace::zeros(&g, g.steps_for(2.0).unwrap());
        let out = dissipative_reverse_solve(&trace, &unit(&g), &b).unwrap();
        assert_eq!(out, StatePair::zeros(&g));
    }

    #[test]
    fn solvers_are_linear() {
        let g = Grid2D::new(24).unwrap();
        let c = unit(&g);
        let lb = BoundarySpec::left_bottom(&g);
        let (a, b) = (random_smooth_state(&g, 7), random_smooth_state(&g, 8));
        let (alpha, beta) = (0.7, -1.3);
        let mut combo = a.scaled(alpha);
        combo.add_scaled(beta, &b);
        let ra = forward_solve(&a, &c, &lb, 1.0).unwrap();
        let rb = forward_solve(&b, &c, &lb, 1.0).unwrap();
        let rc = forward_solve(&combo, &c, &lb, 1.0).unwrap();
        let mut expect = ra.trace.clone();
        expect.samples_mut().zip_mut_with(rb.trace.samples(), |x, &y| *x = alpha * *x + beta * y);
        let mut diff = rc.trace.clone();
        diff.add_scaled(-1.0, &expect);
        assert!(diff.norm() <= 1e-10 * rc.trace.norm());

        let va = dissipative_reverse_solve(&ra.trace, &c, &lb).unwrap();
        let vb = dissipative_reverse_solve(&rb.trace, &c, &lb).unwrap();
        let vc = dissipative_reverse_solve(&rc.trace, &c, &lb).unwrap();
        let mut lin = va.scaled(alpha);
        lin.add_scaled(beta, &vb);
        let d = &vc - &lin;
        assert!(d.first.l2_norm() <= 1e-10 * vc.first.l2_norm());
        assert!(d.second.l2_norm() <= 1e-10 * vc.second.l2_norm());
    }

    #[test]
    fn zero_data_dynamics_dissipate_energy() {
        let g = Grid2D::new(32).unwrap();
        let c = unit(&g);
        let b = BoundarySpec::full(&g);
        let start = random_smooth_state(&g, 21);
        let mut energies = Vec::new();
        dissipative_evolve(&start, &c, &b, 2.0, 1, |j, s| {
            energies.push((j, energy(s, &c).unwrap()));
        })
        .unwrap();
        // observer runs from t = T down to 0
        assert_eq!(energies.first().unwrap().0, g.steps_for(2.0).unwrap());
        assert_eq!(energies.last().unwrap().0, 0);
        for w in energies[1..energies.len() - 1].windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "{:?} -> {:?}", w[0], w[1]);
        }
        assert!(energies.last().unwrap().1 < 0.5 * energies[0].1);
    }

    /// Leapfrog energies of consecutive observed levels, in observation order.
    fn pair_energies(levels: &[ScalarField], c: &ScalarField) -> Vec<f64> {
        levels
            .windows(2)
            .map(|w| leapfrog_energy(&w[0], &w[1], c).unwrap())
            .collect()
    }

    #[test]
    fn leapfrog_energy_is_conserved_by_the_forward_solve() {
        let g = Grid2D::new(40).unwrap();
        let c = ScalarField::from_fn(&g, |x, y| 1.0 + 0.3 * (x * y).sin().powi(2));
        let s0 = StatePair::new(random_smooth_field(&g, 3), random_smooth_field(&g, 4)).unwrap();
        let mut levels = Vec::new();
        forward_solve_observed(&s0, &c, &BoundarySpec::full(&g), 1.0, 1, |_, s| levels.push(s.first.clone())).unwrap();
        let es = pair_energies(&levels, &c);
        for e in &es {
            assert!((e / es[0] - 1.0).abs() < 1e-12, "{e} vs {}", es[0]);
        }
    }

    #[test]
    fn leapfrog_energy_decays_under_dissipation() {
        let g = Grid2D::new(32).unwrap();
        let c = unit(&g);
        let start = StatePair::new(
            ScalarField::from_fn(&g, |x, y| ((7.0 * x).sin() * (5.0 * y).cos()).powi(3)),
            random_smooth_field(&g, 9),
        )
        .unwrap();
        let mut levels = Vec::new();
        dissipative_evolve(&start, &c, &BoundarySpec::left_bottom(&g), 2.0, 1, |_, s| {
            levels.push(s.first.clone())
        })
        .unwrap();
        // observation order runs backwards in time: (later, earlier) = (w[0], w[1])
        let es = pair_energies(&levels, &c);
        for w in es.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        assert!(*es.last().unwrap() < 0.9 * es[0]);
        assert!(es.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn rejects_unstable_or_mismatched_inputs() {
        let g = Grid2D::with_dt_factor(16, 0.9).unwrap();
        let s = StatePair::zeros(&g);
        let err = forward_solve(&s, &unit(&g), &BoundarySpec::full(&g), 0.9 * g.dx() * 10.0);
        assert!(matches!(err, Err(Error::Cfl { .. })));
        let g2 = Grid2D::new(16).unwrap();
        let other = Grid2D::new(17).unwrap();
        let err = forward_solve(&StatePair::zeros(&g2), &unit(&other), &BoundarySpec::full(&g2), 1.0);
        assert!(matches!(err, Err(Error::GridMismatch(_))));
        let err = forward_solve(&StatePair::zeros(&g2), &unit(&g2), &BoundarySpec::full(&g2), 0.013);
        assert!(matches!(err, Err(Error::StepCount { .. })));
    }
}
