use std::collections::HashSet;

use cavity_core::fdtd::{dissipative_reverse_solve, forward_solve};
use cavity_core::io::{read_field_csv, read_trace, write_field_csv, write_trace};
use cavity_core::norms::{boundary_mean, seminorm};
use cavity_core::{BoundarySpec, BoundaryTrace, Grid2D, ScalarField, StatePair, Subspace};
use ndarray::Array2;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(f64::MAX),
    ]
}

fn field(n: usize) -> impl Strategy<Value = ScalarField> {
    let side = n + 2;
    prop::collection::vec(finite(), side * side).prop_map(move |v| {
        let g = Grid2D::new(n).unwrap();
        ScalarField::from_array(&g, Array2::from_shape_vec((side, side), v).unwrap()).unwrap()
    })
}

fn moderate_field(n: usize) -> impl Strategy<Value = ScalarField> {
    let side = n + 2;
    prop::collection::vec(-1.0..1.0f64, side * side).prop_map(move |v| {
        let g = Grid2D::new(n).unwrap();
        ScalarField::from_array(&g, Array2::from_shape_vec((side, side), v).unwrap()).unwrap()
    })
}

fn bits(a: &Array2<f64>) -> Vec<u64> {
    a.iter().map(|v| v.to_bits()).collect()
}

fn rel_diff(a: &StatePair, b: &StatePair) -> f64 {
    let d = a - b;
    let num = d.first.l2_norm() + d.second.l2_norm();
    let den = a.first.l2_norm() + a.second.l2_norm();
    num / den.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_csv_is_bit_exact(f in (2usize..7).prop_flat_map(field)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &f).unwrap();
        let back = read_field_csv(&p, f.grid()).unwrap();
        prop_assert_eq!(bits(back.values()), bits(f.values()));
    }

    #[test]
    fn trace_csv_is_bit_exact(
        (n, rows, vals) in (2usize..6, 0usize..5)
            .prop_flat_map(|(n, rows)| (Just(n), Just(rows), prop::collection::vec(finite(), rows * (4 * n + 4))))
    ) {
        let g = Grid2D::new(n).unwrap();
        let t = BoundaryTrace::from_samples(&g, Array2::from_shape_vec((rows, g.boundary_len()), vals).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        write_trace(&p, &t).unwrap();
        let back = read_trace(&p, &g).unwrap();
        prop_assert_eq!(bits(back.samples()), bits(t.samples()));
    }

    #[test]
    fn boundary_order_is_a_bijection_onto_the_ring(n in 2usize..40) {
        let g = Grid2D::new(n).unwrap();
        let s = g.side();
        let nodes: HashSet<(usize, usize)> = (0..g.boundary_len()).map(|k| g.boundary_node(k)).collect();
        prop_assert_eq!(nodes.len(), g.boundary_len());
        prop_assert_eq!(g.boundary_len(), 4 * s - 4);
        for &(i, j) in &nodes {
            prop_assert!(i == 0 || j == 0 || i == s - 1 || j == s - 1);
        }
        for k in 0..g.boundary_len() {
            let (i, j) = g.boundary_node(k);
            let (a, b) = g.inward_neighbor(k);
            prop_assert_eq!(i.abs_diff(a) + j.abs_diff(b), 1);
        }
    }

    #[test]
    fn projectors_are_idempotent_and_contracting(
        (u, v) in (3usize..12).prop_flat_map(|n| (moderate_field(n), moderate_field(n)))
    ) {
        let c = ScalarField::constant(u.grid(), 1.0);
        let s = StatePair::new(u, v).unwrap();
        for sub in [Subspace::H0, Subspace::H1] {
            let p = sub.project(&s);
            prop_assert!(boundary_mean(&p.first).abs() < 1e-12);
            prop_assert!(rel_diff(&sub.project(&p), &p) < 1e-14);
            prop_assert!(seminorm(&p, &c).unwrap() <= seminorm(&s, &c).unwrap() * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn measurement_and_reversal_are_linear(
        (a, b, alpha) in (moderate_field(12), moderate_field(12), -3.0..3.0f64)
    ) {
        let g = *a.grid();
        let c = ScalarField::constant(&g, 1.0);
        let spec = BoundarySpec::left_bottom(&g);
        let t = 1.0;
        let sa = StatePair::from_position(a);
        let sb = StatePair::new(ScalarField::zeros(&g), b).unwrap();
        let mut combo = sa.clone();
        combo.add_scaled(alpha, &sb);

        let ga = forward_solve(&sa, &c, &spec, t).unwrap().trace;
        let gb = forward_solve(&sb, &c, &spec, t).unwrap().trace;
        let gc = forward_solve(&combo, &c, &spec, t).unwrap().trace;
        let mut expect = ga.clone();
        expect.add_scaled(alpha, &gb);
        let mut d = gc.clone();
        d.add_scaled(-1.0, &expect);
        prop_assert!(d.norm() <= 1e-9 * expect.norm().max(1e-300));

        let va = dissipative_reverse_solve(&ga, &c, &spec).unwrap();
        let vb = dissipative_reverse_solve(&gb, &c, &spec).unwrap();
        let vc = dissipative_reverse_solve(&gc, &c, &spec).unwrap();
        let mut expect = va.clone();
        expect.add_scaled(alpha, &vb);
        prop_assert!(rel_diff(&expect, &vc) <= 1e-9);
    }
}
