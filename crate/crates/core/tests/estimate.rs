use mdest::estimate::{
    effectivities, eta_df_parallel, eta_df_perp, eta_r, estimate, true_errors, Reference, TrueErrors, EXACT_FLOOR,
};
use mdest::geometry::{Segment, Vec2};
use mdest::mdgeom::{build_domain, rectangle, segment, DomainSpec, MdDomain, PermeabilityField, ScalarField, SymTensor};
use mdest::mdgrid::{generate_matching_bundle, CellMesh, SimplicialGrid};
use mdest::mdsolve::{build_projection_caches, solve_problem, SolverOptions};
use mdest::project::PolyField;
use mdest::recon::{build_conforming_potential, ConformingPotential};
use mdest::scenarios::series_resistance_scenario;

fn square(k: SymTensor<f64>, f: ScalarField<f64>, g: f64) -> MdDomain<f64> {
    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(0.0, 0.0, 1.0, 1.0));
    spec.set_permeability(m, PermeabilityField::Constant(k));
    spec.set_source(m, f);
    for (p, q) in [((0.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (1.0, 1.0)), ((1.0, 1.0), (0.0, 1.0)), ((0.0, 1.0), (0.0, 0.0))] {
        spec.add_dirichlet(m, segment(p, q), ScalarField::Constant(g));
    }
    build_domain(spec).unwrap()
}

/// Normal traces `u·n_f` of a constant velocity.
fn uniform_flux(g: &SimplicialGrid<f64>, u: Vec2<f64>) -> Vec<f64> {
    (0..g.n_faces()).map(|f| g.face_normal(f).dot(u)).collect()
}

/// `∫_T q` for quadratic `q`: edge-midpoint rule, exact for degree 2.
fn midpoint_rule(g: &SimplicialGrid<f64>, k: usize, q: impl Fn(Vec2<f64>) -> f64) -> f64 {
    let v = g.cell_vertices(k);
    let m = [(v[0] + v[1]) * 0.5, (v[1] + v[2]) * 0.5, (v[2] + v[0]) * 0.5];
    g.cell_measure(k) / 3.0 * m.iter().map(|&x| q(x)).sum::<f64>()
}

#[test]
fn uniform_flow_against_zero_potential() {
    let dom = square(SymTensor::isotropic(1.0), ScalarField::Constant(0.0), 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let g = &bundle.subdomain_grids[0];
    let flux = uniform_flux(g, Vec2::new(1.0, 0.0));
    let zero = PolyField::constant(g, 1, 0.0);
    for k in 0..g.n_cells() {
        let eta = eta_df_parallel(&dom, g, 0, k, &flux, &zero);
        assert!((eta - g.cell_measure(k).sqrt()).abs() < 1e-14);
    }
}

#[test]
fn anisotropic_permeability_weights_the_flux() {
    let dom = square(SymTensor::diag(1.0, 100.0), ScalarField::Constant(0.0), 0.0);
    let bundle = generate_matching_bundle(&dom, 0.5).unwrap();
    let g = &bundle.subdomain_grids[0];
    let zero = PolyField::constant(g, 1, 0.0);
    let fx = uniform_flux(g, Vec2::new(1.0, 0.0));
    let fy = uniform_flux(g, Vec2::new(0.0, 1.0));
    for k in 0..g.n_cells() {
        let a = g.cell_measure(k).sqrt();
        assert!((eta_df_parallel(&dom, g, 0, k, &fx, &zero) - a).abs() < 1e-14);
        assert!((eta_df_parallel(&dom, g, 0, k, &fy, &zero) - a / 10.0).abs() < 1e-14);
    }
}

#[test]
fn consistent_flux_and_potential_give_no_diffusive_flux_term() {
    // u = -K∇s with s = 2x - y and K = diag(1, 100)
    let dom = square(SymTensor::diag(1.0, 100.0), ScalarField::Constant(0.0), 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let g = &bundle.subdomain_grids[0];
    let s = PolyField::interpolate(g, 1, |x| 2.0 * x.x - x.y);
    let flux = uniform_flux(g, Vec2::new(-2.0, 100.0));
    for k in 0..g.n_cells() {
        assert!(eta_df_parallel(&dom, g, 0, k, &flux, &s) < 1e-12);
    }
}

#[test]
fn interface_term_of_a_constant_jump() {
    let seg = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, 2.0));
    let g: SimplicialGrid<f64> = SimplicialGrid::chain(&seg, &[0.0, 0.5, 2.0]).unwrap();
    let hi = PolyField::constant(&g, 1, 1.0);
    let lo = PolyField::constant(&g, 1, 1.25);
    for c in 0..2 {
        let m = g.cell_measure(c).sqrt();
        assert!((eta_df_perp(&g, c, 1.0, 0.0, &lo, &hi) - 0.25 * m).abs() < 1e-15);
        // κ = 4, λ = -κ(s_lo - s_hi) cancels the jump
        assert!(eta_df_perp(&g, c, 4.0, -1.0, &lo, &hi) < 1e-15);
        assert!((eta_df_perp(&g, c, 4.0, 1.0, &lo, &hi) - m).abs() < 1e-14);
    }
}

#[test]
fn residual_of_a_linear_source() {
    let dom = square(SymTensor::isotropic(1.0), ScalarField::function(|x: Vec2<f64>| x.x), 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let g = &bundle.subdomain_grids[0];
    let zero = vec![0.0; g.n_faces()];
    for k in 0..g.n_cells() {
        let norm = midpoint_rule(g, k, |x| x.x * x.x).sqrt();
        let expected = g.cell_diameter(k) / std::f64::consts::PI * norm;
        assert!((eta_r(&dom, g, 0, k, &zero, 0.0) - expected).abs() < 1e-14);
    }
    // a flux matching the cell mean leaves only the oscillation f - f̄
    let u = uniform_flux(g, Vec2::new(0.0, 0.0));
    let k = 0;
    let mean = g.cell_centroid(k).x;
    let osc = midpoint_rule(g, k, |x| (x.x - mean) * (x.x - mean)).sqrt();
    let lower = -mean * g.cell_measure(k);
    let expected = g.cell_diameter(k) / std::f64::consts::PI * osc;
    assert!((eta_r(&dom, g, 0, k, &u, lower) - expected).abs() < 1e-14);
}

#[test]
fn residual_uses_the_root_of_the_smallest_eigenvalue() {
    let f = || ScalarField::Constant(1.0);
    let iso = square(SymTensor::isotropic(4.0), f(), 0.0);
    let aniso = square(SymTensor::diag(1.0, 100.0), f(), 0.0);
    let unit = square(SymTensor::isotropic(1.0), f(), 0.0);
    let bundle = generate_matching_bundle(&unit, 0.5).unwrap();
    let g = &bundle.subdomain_grids[0];
    let zero = vec![0.0; g.n_faces()];
    for k in 0..g.n_cells() {
        let base = eta_r(&unit, g, 0, k, &zero, 0.0);
        assert!((eta_r(&iso, g, 0, k, &zero, 0.0) - base / 2.0).abs() < 1e-15);
        assert!((eta_r(&aniso, g, 0, k, &zero, 0.0) - base).abs() < 1e-15);
    }
}

#[test]
fn zero_data_gives_zero_majorant() {
    let dom = square(SymTensor::isotropic(1.0), ScalarField::Constant(0.0), 0.0);
    let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
    let caches = build_projection_caches(&dom, &bundle).unwrap();
    let (sol, _) = solve_problem(&dom, &bundle, &SolverOptions::default()).unwrap();
    let pot = build_conforming_potential(&sol, &dom, &bundle).unwrap();
    let rep = estimate(&dom, &bundle, &caches, &sol, &pot).unwrap();
    assert_eq!(rep.majorant, 0.0);
}

#[test]
fn majorant_is_homogeneous_in_the_data() {
    let run = |a: f64| {
        let dom = square(SymTensor::isotropic(1.0), ScalarField::function(move |x: Vec2<f64>| a * x.x * x.y), a * 0.5);
        let bundle = generate_matching_bundle(&dom, 0.25).unwrap();
        let caches = build_projection_caches(&dom, &bundle).unwrap();
        let (sol, _) = solve_problem(&dom, &bundle, &SolverOptions::default()).unwrap();
        let pot = build_conforming_potential(&sol, &dom, &bundle).unwrap();
        estimate(&dom, &bundle, &caches, &sol, &pot).unwrap()
    };
    let (one, three) = (run(1.0), run(3.0));
    assert!(one.majorant > 0.0);
    assert!((three.majorant - 3.0 * one.majorant).abs() < 1e-12 * one.majorant.max(1.0));
    assert!(one.square_sum_defect() < 1e-14);
}

#[test]
fn zero_discrete_solution_measures_the_exact_energy() {
    // exact pressure gradient -1/3 in the matrix, zero in the fracture,
    // interface jumps 1/3 with κ = 1: both norms squared are 1/9 + 2/9
    let sc = series_resistance_scenario::<f64>().unwrap();
    let bundle = generate_matching_bundle(&sc.domain, 0.25).unwrap();
    let (mut sol, _) = solve_problem(&sc.domain, &bundle, &SolverOptions::default()).unwrap();
    let pot = build_conforming_potential(&sol, &sc.domain, &bundle).unwrap();
    let exact = true_errors(&sc.domain, &bundle, &sol, &pot, Some(Reference::Analytic(sc.analytic.as_ref().unwrap()))).unwrap();
    assert!(exact.primal < 1e-12 && exact.dual < 1e-12);

    for v in sol.flux.iter_mut().chain(sol.pressure.iter_mut()).chain(sol.mortar.iter_mut()) {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    let zero = ConformingPotential {
        fields: bundle.subdomain_grids.iter().map(|g| PolyField::constant(g, 1, 0.0)).collect(),
        nodal: bundle.subdomain_grids.iter().map(|g| vec![0.0; g.n_nodes()]).collect(),
    };
    let e = true_errors(&sc.domain, &bundle, &sol, &zero, Some(Reference::Analytic(sc.analytic.as_ref().unwrap()))).unwrap();
    let expected = (1.0f64 / 3.0).sqrt();
    assert!((e.primal - expected).abs() < 1e-13, "{}", e.primal);
    assert!((e.dual - expected).abs() < 1e-13, "{}", e.dual);
}

#[test]
fn effectivity_is_undefined_at_round_off() {
    let tiny = TrueErrors { primal: EXACT_FLOOR / 2.0, dual: 0.5 };
    assert_eq!(effectivities(1.0, &tiny), (None, Some(2.0)));
}

#[test]
fn true_errors_need_a_reference() {
    let sc = series_resistance_scenario::<f64>().unwrap();
    let bundle = generate_matching_bundle(&sc.domain, 0.5).unwrap();
    let (sol, _) = solve_problem(&sc.domain, &bundle, &SolverOptions::default()).unwrap();
    let pot = build_conforming_potential(&sol, &sc.domain, &bundle).unwrap();
    assert!(matches!(true_errors(&sc.domain, &bundle, &sol, &pot, None), Err(mdest::Error::MissingReference)));
}
