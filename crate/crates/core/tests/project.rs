mod common;

use common::*;
use mdest::geometry::{Segment, Vec2};
use mdest::mdgrid::{CellMesh, SimplicialGrid};
use mdest::project::{l2_project, mass_constrained_project, mass_constrained_project_with, prolong, LocalSystems, PolyField};
use mdest::transfer::build_transfer;
use mdest::Error;
use proptest::prelude::*;

#[test]
fn six_operators_are_identities_on_matching_grids() {
    let mut r = rng(11);
    for _ in 0..50 {
        let e = matching_identity_error(&mut r);
        assert!(e <= 1e-13, "identity error {e}");
    }
}

#[test]
fn degree_zero_constrained_projection_is_overlap_average() {
    let mut r = rng(12);
    for _ in 0..100 {
        assert!(overlap_average_error(&mut r) <= 1e-14);
    }
}

#[test]
fn scott_zhang_reproduces_affine_functions_in_two_dimensions() {
    let mut r = rng(13);
    for _ in 0..10 {
        let a = random_triangulation(&mut r, 3, 4);
        let b = random_triangulation(&mut r, 5, 2);
        let e = sz_reproduction_error(&a, &b, |x| 0.3 + 1.7 * x.x - 2.2 * x.y);
        assert!(e <= 1e-13, "{e}");
    }
}

#[test]
fn constrained_projection_conserves_mass_in_two_dimensions() {
    let mut r = rng(14);
    for _ in 0..10 {
        let a = random_triangulation(&mut r, 4, 3);
        let b = random_triangulation(&mut r, 3, 5);
        for degree in [0, 1] {
            let w = random_p1(&mut r, &a);
            assert!(mass_residual(&a, &b, &w, degree) <= 1e-12);
        }
    }
}

#[test]
fn l2_projection_keeps_polynomials_of_its_degree() {
    let mut r = rng(15);
    let seg = random_segment(&mut r);
    let a = random_chain(&mut r, &seg, 7);
    let b = random_chain(&mut r, &seg, 4);
    let tg = build_transfer(&a, &b).unwrap();
    let f = |x: Vec2<f64>| 2.0 - x.x + 0.5 * x.y;
    let w = PolyField::interpolate(&a, 1, f);
    let out = l2_project(&prolong(&w, &a, &tg).unwrap(), &tg, &b, 1).unwrap();
    for k in 0..b.n_cells() {
        for x in &b.cell_vertices(k)[..2] {
            assert!((out.eval(&b, k, *x) - f(*x)).abs() < 1e-13);
        }
    }
}

#[test]
fn prescribed_masses_are_met_exactly() {
    let seg = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0));
    let a = SimplicialGrid::chain(&seg, &[0.0, 0.7, 2.0]).unwrap();
    let b = SimplicialGrid::chain(&seg, &[0.0, 1.1, 1.5, 2.0]).unwrap();
    let tg = build_transfer(&a, &b).unwrap();
    let w = prolong(&PolyField::interpolate(&a, 1, |x| x.x * x.x), &a, &tg).unwrap();
    let (out, mult) = mass_constrained_project_with(&w, &tg, &b, 1, &[1.0, -2.0, 0.25]).unwrap();
    for (k, m) in [1.0f64, -2.0, 0.25].into_iter().enumerate() {
        assert!((out.integral(&b, k) - m).abs() < 1e-14);
    }
    assert_eq!(mult.len(), 3);
}

#[test]
fn fields_from_other_grids_are_rejected() {
    let seg = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0));
    let a = SimplicialGrid::chain(&seg, &[0.0, 0.5, 1.0]).unwrap();
    let b = a.duplicate();
    let tg = build_transfer(&a, &b).unwrap();
    let stray = PolyField::constant(&a, 0, 1.0);
    assert!(matches!(mass_constrained_project(&stray, &tg, &b, 0), Err(Error::GridMismatch(_))));
}

#[test]
fn local_systems_have_expected_shape() {
    let mut r = rng(16);
    let g = random_triangulation(&mut r, 2, 2);
    let s = LocalSystems::new(&g, 1).unwrap();
    assert_eq!(s.mass.len(), g.n_cells());
    // row sums of the P1 mass matrix are |K|/3
    for k in 0..g.n_cells() {
        let m = &s.mass[k];
        let row: f64 = m[0..3].iter().sum();
        assert!((row - g.cell_measure(k) / 3.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mass_is_conserved_on_random_segment_pairs(seed in any::<u64>(), ns in 1usize..20, nd in 1usize..20, degree in 0usize..2) {
        let mut r = rng(seed);
        let seg = random_segment(&mut r);
        let a = random_chain(&mut r, &seg, ns);
        let b = random_chain(&mut r, &seg, nd);
        let w = random_p1(&mut r, &a);
        prop_assert!(mass_residual(&a, &b, &w, degree) <= 1e-12);
    }

    #[test]
    fn scott_zhang_reproduces_affine_on_random_segment_pairs(seed in any::<u64>(), ns in 1usize..20, nd in 1usize..20) {
        let mut r = rng(seed);
        let seg = random_segment(&mut r);
        let a = random_chain(&mut r, &seg, ns);
        let b = random_chain(&mut r, &seg, nd);
        let (c0, c1, c2) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        prop_assert!(sz_reproduction_error(&a, &b, |x| c0 + c1 * x.x + c2 * x.y) <= 1e-13);
    }
}

use rand::Rng;
