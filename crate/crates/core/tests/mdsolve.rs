use mdest::geometry::{Side, Vec2};
use mdest::mdgeom::{build_domain, rectangle, segment, DomainSpec, MdDomain, ScalarField};
use mdest::mdgrid::{generate_matching_bundle, CellMesh, FaceTag};
use mdest::mdsolve::{
    assemble, build_projection_caches, check_local_conservation, rt0_eval, solve, solve_problem, SolverOptions,
};
use mdest::pipeline::{build_bundle, Configuration};
use mdest::scenarios::series_resistance_scenario;
use mdest::Error;

fn opts() -> SolverOptions<f64> {
    SolverOptions::default()
}

fn series(kappa: f64, source: f64) -> MdDomain<f64> {
    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(0.0, 0.0, 1.0, 1.0));
    let f = spec.add_subdomain(segment((0.5, 0.0), (0.5, 1.0)));
    spec.add_interface(m, f, Some(Side::Left), kappa);
    spec.add_interface(m, f, Some(Side::Right), kappa);
    spec.add_dirichlet(m, segment((0.0, 0.0), (0.0, 1.0)), ScalarField::Constant(1.0));
    spec.add_dirichlet(m, segment((1.0, 0.0), (1.0, 1.0)), ScalarField::Constant(0.0));
    spec.set_source(m, ScalarField::Constant(source));
    build_domain(spec).unwrap()
}

/// Hand solve of the three-resistor chain: left half (length 1/2, K = 1),
/// two interfaces (resistance 1/κ each), right half.
fn series_oracle(kappa: f64) -> (f64, f64) {
    let lambda = 1.0 / (0.5 + 2.0 / kappa + 0.5);
    let p_frac = 1.0 - lambda * (0.5 + 1.0 / kappa);
    (lambda, p_frac)
}

#[test]
fn series_resistance_is_reproduced_on_all_configurations() {
    let sc = series_resistance_scenario::<f64>().unwrap();
    let (lambda, pf) = series_oracle(1.0);
    assert!((lambda - 1.0 / 3.0).abs() < 1e-15 && (pf - 0.5).abs() < 1e-15);
    for h in [0.25, 0.125] {
        for config in [Configuration::Matching, Configuration::Perturbed(1.0), Configuration::Perturbed(-1.0)] {
            let bundle = build_bundle(&sc.domain, h, config).unwrap();
            let (sol, _) = solve_problem(&sc.domain, &bundle, &opts()).unwrap();
            assert!(sol.residual <= 1e-10);
            for &p in &sol.pressure[1] {
                assert!((p - pf).abs() < 1e-10);
            }
            for &l in &sol.mortar[0] {
                assert!((l - lambda).abs() < 1e-10);
            }
            for &l in &sol.mortar[1] {
                assert!((l + lambda).abs() < 1e-10);
            }
            let g = &bundle.subdomain_grids[0];
            for k in 0..g.n_cells() {
                let c = g.cell_centroid(k);
                let exact = if c.x < 0.5 { 1.0 - c.x / 3.0 } else { (1.0 - c.x) / 3.0 };
                assert!((sol.pressure[0][k] - exact).abs() < 1e-10);
                let u = rt0_eval(&sol, &bundle, 0, k, c).unwrap();
                assert!((u.x - lambda).abs() < 1e-10 && u.y.abs() < 1e-10);
            }
            assert!(check_local_conservation(&sol, &sc.domain, &bundle).max <= 1e-12);
        }
    }
}

#[test]
fn system_is_symmetric_with_expected_dimension() {
    let dom = series(1.0, 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let caches = build_projection_caches(&dom, &bundle).unwrap();
    let sys = assemble(&dom, &bundle, &caches).unwrap();
    let mut expected = 0;
    for g in &bundle.subdomain_grids {
        expected += (0..g.n_faces())
            .filter(|&f| matches!(g.tag(f), FaceTag::Interior | FaceTag::Dirichlet))
            .count();
        expected += g.n_cells();
    }
    expected += bundle.interface_grids.iter().map(|g| g.n_cells()).sum::<usize>();
    assert_eq!(sys.rhs.len(), expected);
    assert_eq!(sys.matrix.nrows, expected);
    assert!(sys.matrix.asymmetry() <= 1e-15 * sys.matrix.max_abs());
}

#[test]
fn zero_data_gives_zero_solution() {
    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(0.0, 0.0, 1.0, 1.0));
    spec.add_dirichlet(m, segment((0.0, 0.0), (1.0, 0.0)), ScalarField::Constant(0.0));
    spec.add_dirichlet(m, segment((1.0, 0.0), (1.0, 1.0)), ScalarField::Constant(0.0));
    spec.add_dirichlet(m, segment((1.0, 1.0), (0.0, 1.0)), ScalarField::Constant(0.0));
    spec.add_dirichlet(m, segment((0.0, 1.0), (0.0, 0.0)), ScalarField::Constant(0.0));
    let dom = build_domain(spec).unwrap();
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let (sol, _) = solve_problem(&dom, &bundle, &opts()).unwrap();
    assert!(sol.pressure[0].iter().all(|&p| p == 0.0));
    assert!(sol.flux[0].iter().all(|&u| u == 0.0));
}

#[test]
fn missing_dirichlet_is_singular() {
    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(0.0, 0.0, 1.0, 1.0));
    spec.set_source(m, ScalarField::Constant(0.0));
    let dom = MdDomain::build_unchecked(spec).unwrap();
    let bundle = generate_matching_bundle(&dom, 0.5).unwrap();
    assert!(matches!(solve_problem(&dom, &bundle, &opts()), Err(Error::SingularSystem(_))));
}

#[test]
fn dense_and_sparse_paths_agree() {
    let dom = series(2.0, 1.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let caches = build_projection_caches(&dom, &bundle).unwrap();
    let sys = assemble(&dom, &bundle, &caches).unwrap();
    let dense = solve(&sys, &SolverOptions { dense_threshold: usize::MAX, ..opts() }).unwrap();
    let sparse = solve(&sys, &SolverOptions { dense_threshold: 0, ..opts() }).unwrap();
    for (a, b) in dense.pressure.iter().flatten().zip(sparse.pressure.iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn corrupted_mortar_breaks_conservation_next_to_the_interface() {
    let dom = series(1.0, 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let (mut sol, _) = solve_problem(&dom, &bundle, &opts()).unwrap();
    assert!(check_local_conservation(&sol, &dom, &bundle).max <= 1e-12);
    sol.mortar[0][1] *= 1.1;
    let report = check_local_conservation(&sol, &dom, &bundle);
    let host_face = bundle.internal_boundary_faces[0][1];
    let (host_cell, _) = bundle.subdomain_grids[0].face_cells(host_face);
    assert!(report.per_cell[0][host_cell] > 1e-3);
    assert!(report.per_cell[1].iter().any(|&r| r > 1e-3));
}

#[test]
fn large_kappa_approaches_the_unfractured_solution() {
    let h = 0.125;
    let (lambda, pf) = series_oracle(1e6);
    let dom = series(1e6, 1.0);
    let bundle = generate_matching_bundle(&dom, h).unwrap();
    let (sol, _) = solve_problem(&dom, &bundle, &opts()).unwrap();
    assert!(lambda > 0.0 && pf > 0.0);

    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(0.0, 0.0, 1.0, 1.0));
    spec.add_dirichlet(m, segment((0.0, 0.0), (0.0, 1.0)), ScalarField::Constant(1.0));
    spec.add_dirichlet(m, segment((1.0, 0.0), (1.0, 1.0)), ScalarField::Constant(0.0));
    spec.set_source(m, ScalarField::Constant(1.0));
    let plain = build_domain(spec).unwrap();
    let pb = generate_matching_bundle(&plain, h).unwrap();
    let (reference, _) = solve_problem(&plain, &pb, &opts()).unwrap();
    let (g, gp) = (&bundle.subdomain_grids[0], &pb.subdomain_grids[0]);
    assert_eq!(g.n_cells(), gp.n_cells());
    let mut worst = 0.0f64;
    for k in 0..g.n_cells() {
        assert!(g.cell_centroid(k).dist(gp.cell_centroid(k)) < 1e-14);
        worst = worst.max((sol.pressure[0][k] - reference.pressure[0][k]).abs());
    }
    assert!(worst <= 1e-4, "max pressure difference {worst}");
}

#[test]
fn rt0_eval_rejects_points_outside() {
    let dom = series(1.0, 0.0);
    let bundle = generate_matching_bundle(&dom, 0.5).unwrap();
    let (sol, _) = solve_problem(&dom, &bundle, &opts()).unwrap();
    assert!(matches!(rt0_eval(&sol, &bundle, 0, 0, Vec2::new(5.0, 5.0)), Err(Error::OutOfCell { .. })));
}
