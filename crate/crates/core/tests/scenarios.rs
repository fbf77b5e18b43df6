use mdest::geometry::Vec2;
use mdest::pipeline::{
    compare_matching_nonmatching, perturbation_sweep, run_configuration, surrogate_solution, Configuration, PipelineOptions,
};
use mdest::scenarios::{network_scenario_2d, scenario_by_name, smooth_source_scenario, ReferenceKind, SCENARIO_NAMES};
use mdest::Error;

/// Central second difference.
fn d2(f: &dyn Fn(Vec2<f64>) -> f64, x: Vec2<f64>, dir: Vec2<f64>) -> f64 {
    let h = 1e-4;
    (f(x + dir * h) - 2.0 * f(x) + f(x - dir * h)) / (h * h)
}

fn d1(f: &dyn Fn(Vec2<f64>) -> f64, x: Vec2<f64>, dir: Vec2<f64>) -> f64 {
    let h = 1e-6;
    (f(x + dir * h) - f(x - dir * h)) / (2.0 * h)
}

#[test]
fn smooth_source_solution_satisfies_the_coupled_equations() {
    let sc = smooth_source_scenario::<f64>().unwrap();
    let a = sc.analytic.as_ref().unwrap();
    let dom = &sc.domain;
    let (ex, ey) = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
    let pm = |x: Vec2<f64>| (a.pressure[0])(x);
    let pf = |x: Vec2<f64>| (a.pressure[1])(x);
    for i in 1..10 {
        for j in 1..10 {
            let x = Vec2::new(i as f64 / 10.0 + 0.013, j as f64 / 10.0);
            if (x.x - 0.5).abs() < 1e-3 {
                continue;
            }
            let lap = d2(&pm, x, ex) + d2(&pm, x, ey);
            assert!((-lap - dom.subdomain(0).source.eval(x)).abs() < 1e-5, "matrix at {x:?}");
            let g = (a.gradient[0])(x);
            assert!((g.x - d1(&pm, x, ex)).abs() < 1e-7 && (g.y - d1(&pm, x, ey)).abs() < 1e-7);
        }
    }
    for j in 1..20 {
        let y = j as f64 / 20.0;
        let x = Vec2::new(0.5, y);
        let (l, r) = (Vec2::new(0.5 - 1e-12, y), Vec2::new(0.5 + 1e-12, y));
        // interface fluxes: outward normal derivative of each side
        let lam_l = -d1(&pm, Vec2::new(0.5 - 1e-3, y), ex);
        let lam_r = d1(&pm, Vec2::new(0.5 + 1e-3, y), ex);
        assert!((lam_l - (a.mortar[0])(x)).abs() < 1e-5);
        assert!((lam_r - (a.mortar[1])(x)).abs() < 1e-5);
        // λ = −κ(p_f − tr p) with κ = 1
        assert!(((a.mortar[0])(x) + (pf(x) - pm(l))).abs() < 1e-10);
        assert!(((a.mortar[1])(x) + (pf(x) - pm(r))).abs() < 1e-10);
        assert!(((a.trace[0])(x) - pm(l)).abs() < 1e-10);
        // fracture: −p_f'' = f_f + λ_L + λ_R
        let rhs = dom.subdomain(1).source.eval(x) + (a.mortar[0])(x) + (a.mortar[1])(x);
        assert!((-d2(&pf, x, ey) - rhs).abs() < 1e-5);
    }
    // Dirichlet data equal the solution on the boundary
    for t in [0.0, 0.1, 0.37, 0.5, 0.8, 1.0] {
        for x in [Vec2::new(0.0, t), Vec2::new(1.0, t), Vec2::new(t, 0.0), Vec2::new(t, 1.0)] {
            let piece = dom.subdomain(0).dirichlet_at(x, 1e-12).unwrap();
            let side = if x.x == 0.5 { Vec2::new(0.5 - 1e-12, x.y) } else { x };
            assert!((piece.value.eval(x) - pm(side)).abs() < 1e-12);
        }
    }
}

#[test]
fn sweep_orders_runs_by_size_with_matching_first() {
    let sc = scenario_by_name::<f64>("series_resistance").unwrap();
    let runs = perturbation_sweep(&sc, &[0.25, 0.125], true, &PipelineOptions::default()).unwrap();
    let labels: Vec<(f64, bool)> = runs.iter().map(|r| (r.h, r.config.is_matching())).collect();
    assert_eq!(labels, vec![(0.25, true), (0.25, false), (0.25, false), (0.125, true), (0.125, false), (0.125, false)]);
    for r in &runs {
        assert!(r.violations(false).is_empty(), "{:?}", r.violations(false));
        assert!(r.report.effectivity_primal.is_none());
    }
    let dev = compare_matching_nonmatching(&runs).unwrap();
    assert!(dev.iter().all(|d| d.relative < 1e-9));
}

#[test]
fn unknown_names_are_configuration_errors() {
    assert!(matches!(scenario_by_name::<f64>("nope"), Err(Error::Config(_))));
    for n in SCENARIO_NAMES {
        assert_eq!(scenario_by_name::<f64>(n).unwrap().name, n);
    }
    let empty: [f64; 0] = [];
    let sc = scenario_by_name::<f64>("series_resistance").unwrap();
    assert!(matches!(perturbation_sweep(&sc, &empty, false, &PipelineOptions::default()), Err(Error::Config(_))));
}

#[test]
fn network_reports_every_dimension() {
    let sc = network_scenario_2d::<f64>().unwrap();
    assert_eq!(sc.domain.n_subdomains(), 6);
    assert_eq!(sc.domain.n_interfaces(), 12);
    let ReferenceKind::Surrogate { refinement } = sc.reference else { panic!("network uses a surrogate") };
    let opts = PipelineOptions::default();
    let s = surrogate_solution(&sc.domain, 0.25, refinement, &opts).unwrap();
    let run = run_configuration(&sc, 0.25, Configuration::Matching, Some(&s), &opts).unwrap();
    let r = &run.report;
    assert!(run.violations(true).is_empty(), "{:?}", run.violations(true));
    assert_eq!(r.eta_subdomain_by_dim[0], 0.0);
    assert!(r.eta_subdomain_by_dim[1] > 0.0 && r.eta_subdomain_by_dim[2] > 0.0);
    assert!(r.eta_interface_by_dim[0] > 0.0 && r.eta_interface_by_dim[1] > 0.0);
    let by_dim: f64 = r.eta_subdomain_by_dim.iter().chain(&r.eta_interface_by_dim).map(|x| x * x).sum();
    let parts: f64 = r.eta_subdomain.iter().chain(&r.eta_interface).map(|x| x * x).sum();
    assert!((by_dim - parts).abs() < 1e-12 * parts);
    assert!(r.effectivity_primal.unwrap() >= 1.0 && r.effectivity_dual.unwrap() >= 1.0);
}
