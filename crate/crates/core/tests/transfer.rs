mod common;

use common::*;
use mdest::geometry::{Segment, Vec2};
use mdest::mdgrid::{CellMesh, SimplicialGrid};
use mdest::transfer::{build_transfer, Parent};
use mdest::Error;

#[test]
fn random_triangulations_are_partitioned() {
    let mut r = rng(21);
    for _ in 0..20 {
        let a = random_triangulation(&mut r, 4, 3);
        let b = random_triangulation(&mut r, 2, 5);
        let tg = build_transfer(&a, &b).unwrap();
        assert!(partition_defect(&tg, &a, &b) <= 1e-12);
        assert!(nodes_included(&tg, &a, &b, 1e-12));
        assert!((tg.total_measure() - 1.0).abs() < 1e-13);
        for k in 0..tg.n_cells() {
            let (s, d) = tg.parents_of(k);
            let c = tg.cell_centroid(k);
            assert!(a.barycentric(s, c).iter().all(|&l| l > -1e-12));
            assert!(b.barycentric(d, c).iter().all(|&l| l > -1e-12));
        }
    }
}

#[test]
fn random_segment_grids_are_partitioned() {
    let mut r = rng(22);
    for n in 1..40 {
        let seg = random_segment(&mut r);
        let a = random_chain(&mut r, &seg, n);
        let b = random_chain(&mut r, &seg, 41 - n);
        let tg = build_transfer(&a, &b).unwrap();
        assert!(partition_defect(&tg, &a, &b) <= 1e-12);
        assert!(nodes_included(&tg, &a, &b, 1e-12));
        assert!(tg.n_cells() < a.n_cells() + b.n_cells());
        for c in 0..a.n_cells() {
            assert!(!tg.children(Parent::Src, c).is_empty());
        }
    }
}

#[test]
fn reversed_orientation_is_accepted() {
    let seg = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
    let rev = Segment::new(seg.b, seg.a);
    let len = seg.length();
    let a: SimplicialGrid<f64> = SimplicialGrid::chain(&seg, &[0.0, 0.4 * len, len]).unwrap();
    let b = SimplicialGrid::chain(&rev, &[0.0, 0.3 * len, len]).unwrap();
    let tg = build_transfer(&a, &b).unwrap();
    assert_eq!(tg.n_cells(), 3);
    assert!(partition_defect(&tg, &a, &b) <= 1e-14);
}

#[test]
fn grids_covering_different_sets_are_rejected() {
    let a: SimplicialGrid<f64> = SimplicialGrid::chain(&Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)), &[0.0, 1.0]).unwrap();
    let b = SimplicialGrid::chain(&Segment::new(Vec2::new(0.0, 0.0), Vec2::new(0.9, 0.0)), &[0.0, 0.9]).unwrap();
    assert!(matches!(build_transfer(&a, &b), Err(Error::CoverageMismatch { .. })));
    let p = SimplicialGrid::point(Vec2::new(0.0, 0.0));
    assert!(matches!(build_transfer(&a, &p), Err(Error::GridMismatch(_))));
}
