//! Solve–reconstruct–estimate runs, perturbation sweeps and the
//! matching versus non-matching comparison.

use rayon::prelude::*;

use crate::estimate::{estimate, true_errors, EstimateReport, Reference, SurrogateSolution, EXACT_FLOOR};
use crate::geometry::Vec2;
use crate::mdgeom::{Geometry, MdDomain};
use crate::mdgrid::{generate_matching_bundle, perturb_internal_nodes, CellMesh, GridBundle, SimplicialGrid};
use crate::mdsolve::{assemble, build_projection_caches, check_local_conservation, solve, MixedSolution, SolverOptions};
use crate::project::ProjectionCache;
use crate::recon::{build_conforming_potential, ConformingPotential};
use crate::scenarios::{ReferenceKind, Scenario};
use crate::{Error, Real, Result};

/// Grid configuration of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Configuration<T> {
    Matching,
    /// Fracture grids shifted by `sign` times half their mean cell
    /// diameter along their tangent, interface grids the opposite way.
    Perturbed(T),
}

impl<T: Real> Configuration<T> {
    pub fn label(&self) -> String {
        match self {
            Configuration::Matching => "matching".into(),
            Configuration::Perturbed(s) if *s >= T::zero() => "perturbed+".into(),
            Configuration::Perturbed(_) => "perturbed-".into(),
        }
    }

    pub fn is_matching(&self) -> bool {
        matches!(self, Configuration::Matching)
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunResult<T> {
    pub scenario: String,
    pub h: T,
    pub config: Configuration<T>,
    pub bundle: GridBundle<T>,
    pub solution: MixedSolution<T>,
    pub potential: ConformingPotential<T>,
    pub report: EstimateReport<T>,
    pub conservation: T,
    /// Largest relative defect `|Σ|t| − |Γ_j|| / |Γ_j|` over the transfer
    /// grids of the run.
    pub partition_defect: T,
    pub n_unknowns: usize,
}

impl<T: Real> RunResult<T> {
    /// Invariant checks whose failure makes a run unusable.
    pub fn violations(&self, surrogate: bool) -> Vec<String> {
        let mut out = Vec::new();
        let tag = format!("{} h={} {}", self.scenario, self.h, self.config.label());
        if !(self.conservation <= T::lit(1e-10)) {
            out.push(format!("{tag}: local mass residual {:e}", self.conservation.to_f64_lossy()));
        }
        if !(self.report.square_sum_defect() <= T::lit(1e-12)) {
            out.push(format!("{tag}: majorant square-sum mismatch"));
        }
        if !(self.partition_defect <= T::lit(1e-12)) {
            out.push(format!("{tag}: transfer grid partition defect {:e}", self.partition_defect.to_f64_lossy()));
        }
        if let Some(e) = &self.report.errors {
            let factor = if surrogate { T::lit(0.99) } else { T::one() };
            let slack = T::lit(1e-8) * self.report.majorant + T::lit(EXACT_FLOOR);
            for (name, val) in [("primal", e.primal), ("dual", e.dual)] {
                if !(self.report.majorant + slack >= factor * val) {
                    out.push(format!(
                        "{tag}: majorant {:e} below {name} error {:e}",
                        self.report.majorant.to_f64_lossy(),
                        val.to_f64_lossy()
                    ));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions<T> {
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for PipelineOptions<T> {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
        }
    }
}

fn tangent<T: Real>(geom: &Geometry<T>) -> Option<Vec2<T>> {
    geom.as_segment().map(|s| s.tangent())
}

/// Non-matching copy of a matching bundle: internal nodes of 1D subdomain
/// grids move by `sign · h̄/2` along the fracture, internal nodes of 1D
/// interface grids by the opposite amount; internal boundary grids keep
/// their nodes.
pub fn perturb_bundle<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>, sign: T) -> Result<GridBundle<T>> {
    let half = T::lit(0.5);
    let shift = |g: &SimplicialGrid<T>, geom: &Geometry<T>, s: T| -> Result<SimplicialGrid<T>> {
        match (g.dim(), tangent(geom)) {
            (1, Some(t)) => perturb_internal_nodes(g, half * g.mean_cell_diameter(), t * s),
            _ => Ok(g.clone()),
        }
    };
    let subdomain_grids = bundle
        .subdomain_grids
        .iter()
        .enumerate()
        .map(|(i, g)| shift(g, &domain.subdomain(i).geometry, sign))
        .collect::<Result<_>>()?;
    let interface_grids = bundle
        .interface_grids
        .iter()
        .enumerate()
        .map(|(j, g)| shift(g, &domain.interface(j).geometry, -sign))
        .collect::<Result<_>>()?;
    Ok(GridBundle {
        subdomain_grids,
        interface_grids,
        internal_boundary_grids: bundle.internal_boundary_grids.clone(),
        internal_boundary_faces: bundle.internal_boundary_faces.clone(),
    })
}

pub fn build_bundle<T: Real>(domain: &MdDomain<T>, h: T, config: Configuration<T>) -> Result<GridBundle<T>> {
    let matching = generate_matching_bundle(domain, h)?;
    match config {
        Configuration::Matching => Ok(matching),
        Configuration::Perturbed(s) => perturb_bundle(domain, &matching, s),
    }
}

/// Relative partition defect of every transfer grid.
pub fn partition_defect<T: Real>(caches: &[ProjectionCache<T>]) -> T {
    let mut worst = T::zero();
    for c in caches {
        if c.interface_grid.dim() == 0 {
            continue;
        }
        let gamma = c.interface_grid.total_measure();
        for tg in [&c.transfer_hi, &c.transfer_lo] {
            worst = worst.max((tg.total_measure() - gamma).abs() / gamma);
        }
    }
    worst
}

/// Solves and reconstructs on a given bundle.
pub fn solve_bundle<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    opts: &PipelineOptions<T>,
) -> Result<(Vec<ProjectionCache<T>>, MixedSolution<T>, ConformingPotential<T>, usize)> {
    let caches = build_projection_caches(domain, bundle)?;
    let system = assemble(domain, bundle, &caches)?;
    let n = system.rhs.len();
    let sol = solve(&system, &opts.solver)?;
    let pot = build_conforming_potential(&sol, domain, bundle)?;
    Ok((caches, sol, pot, n))
}

/// Fine matching solve used as reference for mesh size `h`.
pub fn surrogate_solution<T: Real>(domain: &MdDomain<T>, h: T, refinement: usize, opts: &PipelineOptions<T>) -> Result<SurrogateSolution<T>> {
    let bundle = generate_matching_bundle(domain, h / T::from_usize_lossy(refinement))?;
    let (_, solution, potential, _) = solve_bundle(domain, &bundle, opts)?;
    Ok(SurrogateSolution { bundle, solution, potential })
}

/// Runs one configuration of a scenario.
pub fn run_configuration<T: Real>(
    scenario: &Scenario<T>,
    h: T,
    config: Configuration<T>,
    surrogate: Option<&SurrogateSolution<T>>,
    opts: &PipelineOptions<T>,
) -> Result<RunResult<T>> {
    let domain = &scenario.domain;
    let bundle = build_bundle(domain, h, config)?;
    let (caches, solution, potential, n_unknowns) = solve_bundle(domain, &bundle, opts)?;
    let mut report = estimate(domain, &bundle, &caches, &solution, &potential)?;
    let reference = match (scenario.reference, &scenario.analytic, surrogate) {
        (ReferenceKind::Analytic, Some(a), _) => Some(Reference::Analytic(a)),
        (ReferenceKind::Surrogate { .. }, _, Some(s)) => Some(Reference::Surrogate(s)),
        _ => None,
    };
    if reference.is_some() {
        let errors = true_errors(domain, &bundle, &solution, &potential, reference)?;
        report = report.with_errors(errors);
    }
    let conservation = check_local_conservation(&solution, domain, &bundle).max;
    Ok(RunResult {
        scenario: scenario.name.clone(),
        h,
        config,
        partition_defect: partition_defect(&caches),
        bundle,
        solution,
        potential,
        report,
        conservation,
        n_unknowns,
    })
}

/// Matching run plus one run per perturbation sign for every mesh size.
/// Results are ordered by mesh size, then matching first.
pub fn perturbation_sweep<T: Real>(
    scenario: &Scenario<T>,
    sizes: &[T],
    perturb: bool,
    opts: &PipelineOptions<T>,
) -> Result<Vec<RunResult<T>>> {
    if sizes.is_empty() {
        return Err(Error::Config("no mesh sizes given".into()));
    }
    if perturb && scenario.perturbations.is_empty() {
        return Err(Error::Config("scenario has no perturbation directions".into()));
    }
    let mut configs = vec![Configuration::Matching];
    if perturb {
        configs.extend(scenario.perturbations.iter().map(|&s| Configuration::Perturbed(s)));
    }
    let surrogates: Vec<Option<SurrogateSolution<T>>> = sizes
        .par_iter()
        .map(|&h| match scenario.reference {
            ReferenceKind::Surrogate { refinement } => surrogate_solution(&scenario.domain, h, refinement, opts).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Configuration<T>)> = (0..sizes.len()).flat_map(|k| configs.iter().map(move |&c| (k, c))).collect();
    jobs.par_iter()
        .map(|&(k, c)| run_configuration(scenario, sizes[k], c, surrogates[k].as_ref(), opts))
        .collect()
}

/// Mean and sample standard deviation.
pub fn mean_std<T: Real>(vals: &[T]) -> (T, T) {
    if vals.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::from_usize_lossy(vals.len());
    let mean = vals.iter().copied().sum::<T>() / n;
    if vals.len() < 2 {
        return (mean, T::zero());
    }
    let var = vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    (mean, var.sqrt())
}

/// Reported quantities of a run, by name.
pub fn quantities<T: Real>(run: &RunResult<T>) -> Vec<(&'static str, T)> {
    let r = &run.report;
    let mut q = vec![
        ("majorant", r.majorant),
        ("eta_df", r.eta_df),
        ("eta_r", r.eta_res),
        ("eta_omega_2", r.eta_subdomain_by_dim[2]),
        ("eta_omega_1", r.eta_subdomain_by_dim[1]),
        ("eta_omega_0", r.eta_subdomain_by_dim[0]),
        ("eta_gamma_1", r.eta_interface_by_dim[1]),
        ("eta_gamma_0", r.eta_interface_by_dim[0]),
    ];
    if let Some(e) = &r.errors {
        q.push(("error_primal", e.primal));
        q.push(("error_dual", e.dual));
    }
    q
}

/// Deviation of the perturbed runs from the matching baseline for one
/// quantity at one mesh size.
#[derive(Debug, Clone)]
pub struct Deviation<T> {
    pub h: T,
    pub quantity: &'static str,
    pub baseline: T,
    pub perturbed_mean: T,
    pub perturbed_std: T,
    /// `|mean − baseline| / |baseline|`, absolute when the baseline is at
    /// round-off level.
    pub relative: T,
}

/// Compares the perturbed runs of every mesh size with the matching one.
pub fn compare_matching_nonmatching<T: Real>(runs: &[RunResult<T>]) -> Result<Vec<Deviation<T>>> {
    let mut sizes: Vec<T> = Vec::new();
    for r in runs {
        if !sizes.contains(&r.h) {
            sizes.push(r.h);
        }
    }
    let mut out = Vec::new();
    for h in sizes {
        let base = runs
            .iter()
            .find(|r| r.h == h && r.config.is_matching())
            .ok_or_else(|| Error::Config(format!("no matching run for h = {h}")))?;
        let perturbed: Vec<&RunResult<T>> = runs.iter().filter(|r| r.h == h && !r.config.is_matching()).collect();
        if perturbed.is_empty() {
            return Err(Error::Config(format!("no perturbed runs for h = {h}")));
        }
        for (name, b) in quantities(base) {
            let vals: Vec<T> = perturbed
                .iter()
                .map(|r| quantities(r).into_iter().find(|q| q.0 == name).map(|q| q.1).unwrap_or(T::nan()))
                .collect();
            let (mean, std) = mean_std(&vals);
            let diff = (mean - b).abs();
            let relative = if b.abs() > T::lit(EXACT_FLOOR) { diff / b.abs() } else { diff };
            out.push(Deviation {
                h,
                quantity: name,
                baseline: b,
                perturbed_mean: mean,
                perturbed_std: std,
                relative,
            });
        }
    }
    Ok(out)
}
