//! Bundled verification scenarios.

use std::sync::Arc;

use crate::estimate::{AnalyticSolution, ScalarFn, VectorFn};
use crate::geometry::{Side, Vec2};
use crate::mdgeom::{build_domain, point, rectangle, segment, DomainSpec, MdDomain, PermeabilityField, ScalarField, SymTensor};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Analytic,
    /// Matching solve on a grid `refinement` times finer.
    Surrogate { refinement: usize },
    None,
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub name: String,
    pub domain: MdDomain<T>,
    pub mesh_sizes: Vec<T>,
    /// Signs of the node shifts applied to fracture grids in the
    /// non-matching runs; interface grids move the opposite way.
    pub perturbations: Vec<T>,
    pub reference: ReferenceKind,
    pub analytic: Option<AnalyticSolution<T>>,
    /// File name of the shipped expected-results table.
    pub fixture: &'static str,
}

pub const SCENARIO_NAMES: [&str; 3] = ["series_resistance", "smooth_source", "network_2d"];

pub fn scenario_by_name<T: Real>(name: &str) -> Result<Scenario<T>> {
    match name {
        "series_resistance" => series_resistance_scenario(),
        "smooth_source" => smooth_source_scenario(),
        "network_2d" => network_scenario_2d(),
        _ => Err(Error::Config(format!(
            "unknown scenario '{name}' (available: {})",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

fn sf<T: Real>(f: impl Fn(Vec2<T>) -> T + Send + Sync + 'static) -> ScalarFn<T> {
    Arc::new(f)
}

fn vf<T: Real>(f: impl Fn(Vec2<T>) -> Vec2<T> + Send + Sync + 'static) -> VectorFn<T> {
    Arc::new(f)
}

fn default_sizes<T: Real>() -> Vec<T> {
    vec![T::lit(0.125), T::lit(0.0625), T::lit(0.03125)]
}

fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Unit square cut by a vertical fracture at `x = 1/2`; returns the spec
/// and the indices (matrix, fracture, left interface, right interface).
fn vertical_cut<T: Real>() -> (DomainSpec<T>, [usize; 4]) {
    let mut spec = DomainSpec::new();
    let m = spec.add_subdomain(rectangle(T::zero(), T::zero(), T::one(), T::one()));
    let f = spec.add_subdomain(segment((0.5, 0.0), (0.5, 1.0)));
    let l = spec.add_interface(m, f, Some(Side::Left), T::one());
    let r = spec.add_interface(m, f, Some(Side::Right), T::one());
    (spec, [m, f, l, r])
}

/// Flow across a permeable fracture driven by `p = 1` at `x = 0` and
/// `p = 0` at `x = 1`. The exact solution is piecewise linear in the matrix
/// and constant in the fracture, so it lies in the discrete space.
pub fn series_resistance_scenario<T: Real>() -> Result<Scenario<T>> {
    let (mut spec, [m, _, _, _]) = vertical_cut::<T>();
    spec.add_dirichlet(m, segment((0.0, 0.0), (0.0, 1.0)), ScalarField::Constant(T::one()));
    spec.add_dirichlet(m, segment((1.0, 0.0), (1.0, 1.0)), ScalarField::Constant(T::zero()));
    let third = lit::<T>(1.0 / 3.0);
    let half = lit::<T>(0.5);
    let analytic = AnalyticSolution {
        pressure: vec![
            sf(move |x: Vec2<T>| if x.x < half { T::one() - x.x * third } else { (T::one() - x.x) * third }),
            sf(move |_| half),
        ],
        gradient: vec![vf(move |_| Vec2::new(-third, T::zero())), vf(|_| Vec2::zero())],
        trace: vec![sf(move |_| T::one() - half * third), sf(move |_| half * third)],
        mortar: vec![sf(move |_| third), sf(move |_| -third)],
    };
    Ok(Scenario {
        name: "series_resistance".into(),
        domain: build_domain(spec)?,
        mesh_sizes: default_sizes(),
        perturbations: vec![T::one(), -T::one()],
        reference: ReferenceKind::Analytic,
        analytic: Some(analytic),
        fixture: "series_resistance.csv",
    })
}

/// Manufactured solution on the cut unit square with `s = sin(πy)`:
/// `p_L = s + d(y)(3/2 − x)`, `p_R = s + e(y)(x + 1/2)`, `p_f = s`, with
/// `d = cos(πy)/2` and `e = cos(πy)/2 + sin(πy)/4`. Interface fluxes are
/// `λ_L = d`, `λ_R = e`; Dirichlet data everywhere.
pub fn smooth_source_scenario<T: Real>() -> Result<Scenario<T>> {
    let (mut spec, [m, f, _, _]) = vertical_cut::<T>();
    let pi = lit::<T>(std::f64::consts::PI);
    let half = lit::<T>(0.5);
    let quarter = lit::<T>(0.25);
    let s = move |x: Vec2<T>| (pi * x.y).sin();
    let ds = move |x: Vec2<T>| pi * (pi * x.y).cos();
    let d = move |x: Vec2<T>| half * (pi * x.y).cos();
    let dd = move |x: Vec2<T>| -half * pi * (pi * x.y).sin();
    let e = move |x: Vec2<T>| half * (pi * x.y).cos() + quarter * (pi * x.y).sin();
    let de = move |x: Vec2<T>| -half * pi * (pi * x.y).sin() + quarter * pi * (pi * x.y).cos();
    let a = lit::<T>(1.5);
    let p_l = move |x: Vec2<T>| s(x) + d(x) * (a - x.x);
    let p_r = move |x: Vec2<T>| s(x) + e(x) * (x.x + half);
    let p_m = move |x: Vec2<T>| if x.x < half { p_l(x) } else { p_r(x) };
    let pi2 = pi * pi;
    // -Δp: ∂_yy s = -π² s, ∂_yy d = -π² d, ∂_yy e = -π² e
    spec.set_source(
        m,
        ScalarField::function(move |x: Vec2<T>| {
            if x.x < half {
                pi2 * s(x) + pi2 * d(x) * (a - x.x)
            } else {
                pi2 * s(x) + pi2 * e(x) * (x.x + half)
            }
        }),
    );
    spec.set_source(f, ScalarField::function(move |x: Vec2<T>| pi2 * s(x) - d(x) - e(x)));
    for (p, q) in [
        ((0.0, 0.0), (0.0, 1.0)),
        ((1.0, 0.0), (1.0, 1.0)),
        ((0.0, 0.0), (0.5, 0.0)),
        ((0.5, 0.0), (1.0, 0.0)),
        ((0.0, 1.0), (0.5, 1.0)),
        ((0.5, 1.0), (1.0, 1.0)),
    ] {
        spec.add_dirichlet(m, segment(p, q), ScalarField::function(p_m));
    }
    spec.add_dirichlet(f, point((0.5, 0.0)), ScalarField::function(s));
    spec.add_dirichlet(f, point((0.5, 1.0)), ScalarField::function(s));
    let analytic = AnalyticSolution {
        pressure: vec![sf(p_m), sf(s)],
        gradient: vec![
            vf(move |x: Vec2<T>| {
                if x.x < half {
                    Vec2::new(-d(x), ds(x) + dd(x) * (a - x.x))
                } else {
                    Vec2::new(e(x), ds(x) + de(x) * (x.x + half))
                }
            }),
            vf(move |x: Vec2<T>| Vec2::new(T::zero(), ds(x))),
        ],
        trace: vec![sf(move |x| s(x) + d(x)), sf(move |x| s(x) + e(x))],
        mortar: vec![sf(d), sf(e)],
    };
    Ok(Scenario {
        name: "smooth_source".into(),
        domain: build_domain(spec)?,
        mesh_sizes: default_sizes(),
        perturbations: vec![T::one(), -T::one()],
        reference: ReferenceKind::Analytic,
        analytic: Some(analytic),
        fixture: "smooth_source.csv",
    })
}

/// Unit square crossed by conductive fractures along `x = 1/2` and
/// `y = 1/2` meeting at a point: four fracture branches, one intersection
/// and twelve interfaces. Pressure 1 on the west side and 0 on the east
/// side; a less permeable north-east block; an injection and a production
/// well on the horizontal branches.
pub fn network_scenario_2d<T: Real>() -> Result<Scenario<T>> {
    let mut spec = DomainSpec::new();
    let half = lit::<T>(0.5);
    let m = spec.add_subdomain(rectangle(T::zero(), T::zero(), T::one(), T::one()));
    let west = spec.add_subdomain(segment((0.0, 0.5), (0.5, 0.5)));
    let east = spec.add_subdomain(segment((0.5, 0.5), (1.0, 0.5)));
    let south = spec.add_subdomain(segment((0.5, 0.0), (0.5, 0.5)));
    let north = spec.add_subdomain(segment((0.5, 0.5), (0.5, 1.0)));
    let x = spec.add_subdomain(point((0.5, 0.5)));
    let (kf, kappa) = (lit::<T>(1e4), lit::<T>(1e4));
    let k_low = lit::<T>(0.1);
    spec.set_permeability(
        m,
        PermeabilityField::function(move |p: Vec2<T>| {
            SymTensor::isotropic(if p.x > half && p.y > half { k_low } else { T::one() })
        }),
    );
    for b in [west, east, south, north] {
        spec.set_permeability(b, PermeabilityField::scalar(kf));
        spec.add_interface(m, b, Some(Side::Left), kappa);
        spec.add_interface(m, b, Some(Side::Right), kappa);
    }
    for b in [west, east, south, north] {
        spec.add_interface(b, x, None, kappa);
    }
    let window = lit::<T>(1.0 / 16.0);
    let rate = lit::<T>(0.1);
    let (xi, xp) = (lit::<T>(0.25), lit::<T>(0.75));
    spec.set_source(west, ScalarField::function(move |p: Vec2<T>| if (p.x - xi).abs() < window { rate } else { T::zero() }));
    spec.set_source(east, ScalarField::function(move |p: Vec2<T>| if (p.x - xp).abs() < window { -rate } else { T::zero() }));
    spec.add_dirichlet(m, segment((0.0, 0.0), (0.0, 1.0)), ScalarField::Constant(T::one()));
    spec.add_dirichlet(m, segment((1.0, 0.0), (1.0, 1.0)), ScalarField::Constant(T::zero()));
    spec.add_dirichlet(west, point((0.0, 0.5)), ScalarField::Constant(T::one()));
    spec.add_dirichlet(east, point((1.0, 0.5)), ScalarField::Constant(T::zero()));
    Ok(Scenario {
        name: "network_2d".into(),
        domain: build_domain(spec)?,
        mesh_sizes: vec![T::lit(0.25), T::lit(0.125), T::lit(0.0625)],
        perturbations: vec![T::one(), -T::one()],
        reference: ReferenceKind::Surrogate { refinement: 4 },
        analytic: None,
        fixture: "network_2d.csv",
    })
}
