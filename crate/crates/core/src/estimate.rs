//! Guaranteed a posteriori error majorant: local diffusive and residual
//! estimators, indicators aggregated per subdomain, interface and
//! dimension, energy norms of the true errors and effectivity indices.

use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::{Segment, Vec2};
use crate::mdgeom::{Geometry, MdDomain};
use crate::mdgrid::{merge_breakpoints, CellMesh, ChainIndex, GridBundle, SimplicialGrid};
use crate::mdsolve::{cell_permeability, rt0_divergence_integral, rt0_eval_grid, MixedSolution};
use crate::project::{PolyField, ProjectionCache};
use crate::quadrature::QuadratureRule;
use crate::recon::{p1_gradient, ConformingPotential};
use crate::transfer::{build_transfer, Parent};
use crate::{Error, Real, Result};

/// Quadrature degree of the estimator integrals.
pub const ESTIMATOR_DEGREE: usize = 3;
/// Quadrature degree of the reference error norms.
pub const REFERENCE_DEGREE: usize = 5;
/// True errors at or below this value are treated as exact and carry no
/// effectivity index.
pub const EXACT_FLOOR: f64 = 1e-9;

pub type ScalarFn<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(Vec2<T>) -> Vec2<T> + Send + Sync>;

/// Closed-form solution. Gradients of 1D subdomains are projected onto the
/// fracture tangent; `trace` is the higher-dimensional pressure on each
/// interface, seen from the interface side.
#[derive(Clone)]
pub struct AnalyticSolution<T> {
    pub pressure: Vec<ScalarFn<T>>,
    pub gradient: Vec<VectorFn<T>>,
    pub trace: Vec<ScalarFn<T>>,
    pub mortar: Vec<ScalarFn<T>>,
}

impl<T> std::fmt::Debug for AnalyticSolution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticSolution")
            .field("subdomains", &self.pressure.len())
            .field("interfaces", &self.mortar.len())
            .finish()
    }
}

/// Fine-grid solution used in place of the exact one.
#[derive(Debug, Clone)]
pub struct SurrogateSolution<T> {
    pub bundle: GridBundle<T>,
    pub solution: MixedSolution<T>,
    pub potential: ConformingPotential<T>,
}

#[derive(Debug, Clone, Copy)]
pub enum Reference<'a, T> {
    Analytic(&'a AnalyticSolution<T>),
    Surrogate(&'a SurrogateSolution<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueErrors<T> {
    /// `|||p − s_h|||`.
    pub primal: T,
    /// `|||u − u_h|||_*`.
    pub dual: T,
}

#[derive(Debug, Clone)]
pub struct EstimateReport<T> {
    pub eta_df_par: Vec<Vec<T>>,
    pub eta_df_perp: Vec<Vec<T>>,
    pub eta_r: Vec<Vec<T>>,
    pub eta_subdomain: Vec<T>,
    pub eta_interface: Vec<T>,
    /// `η_{Ω^d}` indexed by `d`.
    pub eta_subdomain_by_dim: [T; 3],
    /// `η_{Γ^d}` indexed by `d`.
    pub eta_interface_by_dim: [T; 2],
    pub eta_df: T,
    pub eta_res: T,
    pub majorant: T,
    pub errors: Option<TrueErrors<T>>,
    pub effectivity_primal: Option<T>,
    pub effectivity_dual: Option<T>,
}

impl<T: Real> EstimateReport<T> {
    /// Attaches true errors and the effectivity indices they imply.
    pub fn with_errors(mut self, errors: TrueErrors<T>) -> Self {
        let (ip, iu) = effectivities(self.majorant, &errors);
        self.errors = Some(errors);
        self.effectivity_primal = ip;
        self.effectivity_dual = iu;
        self
    }

    /// Relative mismatch between the stored majorant and the one recomputed
    /// from the per-cell values.
    pub fn square_sum_defect(&self) -> T {
        let sq = |v: &Vec<Vec<T>>| v.iter().flatten().map(|&x| x * x).sum::<T>();
        let m = (sq(&self.eta_df_par) + sq(&self.eta_df_perp)).sqrt() + sq(&self.eta_r).sqrt();
        let scale = self.majorant.max(T::min_positive_value());
        (m - self.majorant).abs() / scale
    }
}

/// `(I_p, I_u) = (M⊕ / |||p − s_h|||, M⊕ / |||u − u_h|||_*)`; `None` where
/// the error is at round-off level.
pub fn effectivities<T: Real>(majorant: T, errors: &TrueErrors<T>) -> (Option<T>, Option<T>) {
    let floor = T::lit(EXACT_FLOOR);
    let ratio = |e: T| (e > floor).then(|| majorant / e);
    (ratio(errors.primal), ratio(errors.dual))
}

fn tangent_of<T: Real>(grid: &SimplicialGrid<T>, k: usize) -> Vec2<T> {
    let v = grid.cell_vertices(k);
    (v[1] - v[0]).normalized()
}

/// `∇` restricted to the cell's tangent space.
fn restrict<T: Real>(grid: &SimplicialGrid<T>, k: usize, g: Vec2<T>) -> Vec2<T> {
    match grid.dim() {
        0 => Vec2::zero(),
        1 => {
            let t = tangent_of(grid, k);
            t * g.dot(t)
        }
        _ => g,
    }
}

/// `η_{DF∥,K} = ‖K^{-1/2} u_h + K^{1/2} ∇s‖_K`.
pub fn eta_df_parallel<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, k: usize, flux: &[T], pot: &PolyField<T>) -> T {
    if grid.dim() == 0 {
        return T::zero();
    }
    let grad = p1_gradient(grid, k, pot.cell_coeffs(k));
    let quad = QuadratureRule::new(grid.dim(), ESTIMATOR_DEGREE);
    let v = grid.cell_vertices(k);
    let mut acc = T::zero();
    for (x, w) in quad.mapped(&v[..=grid.dim()], grid.cell_measure(k)) {
        let perm = cell_permeability(domain, grid, i, k, x);
        let u = rt0_eval_grid(grid, flux, k, x).unwrap_or_else(|_| Vec2::zero());
        let r = u + perm.apply(grad);
        acc += w * r.dot(perm.inverse().apply(r));
    }
    acc.max(T::zero()).sqrt()
}

/// `η_{DF⊥,K} = ‖κ^{-1/2} λ + κ^{1/2} (P̃ s_lo − P̃ s_hi)‖_K` on interface
/// cell `c`.
pub fn eta_df_perp<T: Real>(grid: &SimplicialGrid<T>, c: usize, kappa: T, lambda: T, lo: &PolyField<T>, hi: &PolyField<T>) -> T {
    let quad = QuadratureRule::new(grid.dim(), ESTIMATOR_DEGREE);
    let v = grid.cell_vertices(c);
    let sk = kappa.sqrt();
    let mut acc = T::zero();
    for (x, w) in quad.mapped(&v[..=grid.dim()], grid.cell_measure(c)) {
        let r = lambda / sk + sk * (lo.eval(grid, c, x) - hi.eval(grid, c, x));
        acc += w * r * r;
    }
    acc.sqrt()
}

/// Smallest eigenvalue of the permeability over the quadrature points and
/// vertices of a cell.
pub fn min_permeability<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, k: usize) -> T {
    let quad = QuadratureRule::new(grid.dim(), ESTIMATOR_DEGREE);
    let v = grid.cell_vertices(k);
    quad.mapped(&v[..=grid.dim()], grid.cell_measure(k))
        .map(|(x, _)| x)
        .chain(v[..=grid.dim()].iter().copied())
        .map(|x| cell_permeability(domain, grid, i, k, x).eigenvalues().0)
        .fold(T::infinity(), T::min)
}

/// `η_{R,K} = h_K / (π c_K) ‖f − div u_h + Σ D̃λ‖_K` with
/// `c_K = sqrt(λ_min(K))`; zero on point cells.
pub fn eta_r<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, k: usize, flux: &[T], lower_source: T) -> T {
    if grid.dim() == 0 {
        return T::zero();
    }
    let meas = grid.cell_measure(k);
    let div = rt0_divergence_integral(grid, flux, k) / meas;
    let coupling = lower_source / meas;
    let quad = QuadratureRule::new(grid.dim(), ESTIMATOR_DEGREE);
    let v = grid.cell_vertices(k);
    let f = &domain.subdomain(i).source;
    let norm = quad
        .mapped(&v[..=grid.dim()], meas)
        .map(|(x, w)| {
            let r = f.eval(x) - div + coupling;
            w * r * r
        })
        .sum::<T>()
        .sqrt();
    let ck = min_permeability(domain, grid, i, k).sqrt();
    grid.cell_diameter(k) / (T::lit(std::f64::consts::PI) * ck) * norm
}

/// Trace of a subdomain potential on the internal boundary grid of
/// interface `j`, as a broken P1 field.
pub fn internal_boundary_trace<T: Real>(bundle: &GridBundle<T>, hi: usize, j: usize, pot: &PolyField<T>) -> Result<PolyField<T>> {
    let ib = &bundle.internal_boundary_grids[j];
    let host = &bundle.subdomain_grids[hi];
    let mut coeffs = Vec::with_capacity(ib.n_cells() * (ib.dim() + 1));
    for e in 0..ib.n_cells() {
        let (kc, _) = host.face_cells(bundle.internal_boundary_faces[j][e]);
        let v = ib.cell_vertices(e);
        for x in &v[..=ib.dim()] {
            coeffs.push(pot.eval(host, kc, *x));
        }
    }
    PolyField::new(ib, 1, coeffs, false)
}

/// Evaluates all local estimators and aggregates them.
pub fn estimate<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    caches: &[ProjectionCache<T>],
    sol: &MixedSolution<T>,
    pot: &ConformingPotential<T>,
) -> Result<EstimateReport<T>> {
    let (df_par, res): (Vec<Vec<T>>, Vec<Vec<T>>) = (0..domain.n_subdomains())
        .into_par_iter()
        .map(|i| {
            let g = &bundle.subdomain_grids[i];
            let flux = sol.full_flux(i);
            let par = (0..g.n_cells()).map(|k| eta_df_parallel(domain, g, i, k, &flux, &pot.fields[i])).collect();
            let r = (0..g.n_cells()).map(|k| eta_r(domain, g, i, k, &flux, sol.lower_source(i, k))).collect();
            (par, r)
        })
        .unzip();
    let df_perp: Vec<Vec<T>> = (0..domain.n_interfaces())
        .into_par_iter()
        .map(|j| {
            let itf = domain.interface(j);
            let cache = &caches[j];
            let trace = internal_boundary_trace(bundle, itf.hi, j, &pot.fields[itf.hi])?;
            let hi = cache.primal_to_interface_hi(&trace)?;
            let lo = cache.primal_to_interface_lo(&pot.fields[itf.lo])?;
            let g = &bundle.interface_grids[j];
            Ok((0..g.n_cells())
                .map(|c| eta_df_perp(g, c, itf.normal_permeability, sol.mortar[j][c], &lo, &hi))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(domain, df_par, df_perp, res))
}

/// Builds the report from per-cell values.
pub fn aggregate<T: Real>(domain: &MdDomain<T>, df_par: Vec<Vec<T>>, df_perp: Vec<Vec<T>>, res: Vec<Vec<T>>) -> EstimateReport<T> {
    let sq = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>();
    let sub_sq: Vec<T> = df_par.iter().zip(&res).map(|(a, b)| sq(a) + sq(b)).collect();
    let itf_sq: Vec<T> = df_perp.iter().map(|v| sq(v)).collect();
    let mut sub_dim = [T::zero(); 3];
    for (i, &s) in sub_sq.iter().enumerate() {
        sub_dim[domain.subdomain(i).dim] += s;
    }
    let mut itf_dim = [T::zero(); 2];
    for (j, &s) in itf_sq.iter().enumerate() {
        itf_dim[domain.interface(j).dim] += s;
    }
    let df = (df_par.iter().map(|v| sq(v)).sum::<T>() + itf_sq.iter().copied().sum::<T>()).sqrt();
    let r = res.iter().map(|v| sq(v)).sum::<T>().sqrt();
    EstimateReport {
        eta_subdomain: sub_sq.iter().map(|s| s.sqrt()).collect(),
        eta_interface: itf_sq.iter().map(|s| s.sqrt()).collect(),
        eta_subdomain_by_dim: sub_dim.map(|s| s.sqrt()),
        eta_interface_by_dim: itf_dim.map(|s| s.sqrt()),
        eta_df_par: df_par,
        eta_df_perp: df_perp,
        eta_r: res,
        eta_df: df,
        eta_res: r,
        majorant: df + r,
        errors: None,
        effectivity_primal: None,
        effectivity_dual: None,
    }
}

/// Pieces of `[0, |seg|]` bounded by the cell breakpoints of all `grids`.
fn interface_pieces<T: Real>(seg: &Segment<T>, grids: &[&SimplicialGrid<T>], tol: T) -> Vec<(T, T)> {
    let lists: Vec<Vec<T>> = grids.iter().map(|g| ChainIndex::new(g, *seg).breakpoints()).collect();
    let mut pts = merge_breakpoints(&lists, tol);
    pts.retain(|&s| s >= -tol && s <= seg.length() + tol);
    pts.windows(2).filter(|w| w[1] - w[0] > tol).map(|w| (w[0], w[1])).collect()
}

struct InterfaceView<'a, T> {
    interface: &'a SimplicialGrid<T>,
    ib: &'a SimplicialGrid<T>,
    ib_faces: &'a [usize],
    hi: &'a SimplicialGrid<T>,
    lo: &'a SimplicialGrid<T>,
    pot_hi: &'a PolyField<T>,
    pot_lo: &'a PolyField<T>,
    mortar: &'a [T],
}

impl<'a, T: Real> InterfaceView<'a, T> {
    fn new(bundle: &'a GridBundle<T>, pot: &'a ConformingPotential<T>, sol: &'a MixedSolution<T>, j: usize, hi: usize, lo: usize) -> Self {
        Self {
            interface: &bundle.interface_grids[j],
            ib: &bundle.internal_boundary_grids[j],
            ib_faces: &bundle.internal_boundary_faces[j],
            hi: &bundle.subdomain_grids[hi],
            lo: &bundle.subdomain_grids[lo],
            pot_hi: &pot.fields[hi],
            pot_lo: &pot.fields[lo],
            mortar: &sol.mortar[j],
        }
    }

    fn grids(&self) -> [&'a SimplicialGrid<T>; 3] {
        [self.interface, self.ib, self.lo]
    }

    /// `(s_hi, s_lo, λ)` at parameter `mid` (cell location) and point `x`.
    fn values(&self, idx: &[ChainIndex<T>; 3], mid: T, x: Vec2<T>, tol: T) -> Result<(T, T, T)> {
        let find = |c: &ChainIndex<T>| c.locate(mid, tol).ok_or(Error::OutOfDomain);
        let (ci, ce, cl) = if self.interface.dim() == 0 {
            (0, 0, 0)
        } else {
            (find(&idx[0])?, find(&idx[1])?, find(&idx[2])?)
        };
        let (kh, _) = self.hi.face_cells(self.ib_faces[ce]);
        Ok((self.pot_hi.eval(self.hi, kh, x), self.pot_lo.eval(self.lo, cl, x), self.mortar[ci]))
    }
}

/// Energy norms of `p − s_h` and `u − u_h` against a reference solution.
pub fn true_errors<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    sol: &MixedSolution<T>,
    pot: &ConformingPotential<T>,
    reference: Option<Reference<'_, T>>,
) -> Result<TrueErrors<T>> {
    let reference = reference.ok_or(Error::MissingReference)?;
    let sub: Vec<(T, T)> = (0..domain.n_subdomains())
        .into_par_iter()
        .map(|i| subdomain_errors(domain, bundle, sol, pot, reference, i))
        .collect::<Result<_>>()?;
    let itf: Vec<(T, T)> = (0..domain.n_interfaces())
        .into_par_iter()
        .map(|j| interface_errors(domain, bundle, sol, pot, reference, j))
        .collect::<Result<_>>()?;
    let (mut p, mut u) = (T::zero(), T::zero());
    for (a, b) in sub.into_iter().chain(itf) {
        p += a;
        u += b;
    }
    Ok(TrueErrors {
        primal: p.sqrt(),
        dual: u.sqrt(),
    })
}

fn subdomain_errors<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    sol: &MixedSolution<T>,
    pot: &ConformingPotential<T>,
    reference: Reference<'_, T>,
    i: usize,
) -> Result<(T, T)> {
    let g = &bundle.subdomain_grids[i];
    if g.dim() == 0 {
        return Ok((T::zero(), T::zero()));
    }
    let flux = sol.full_flux(i);
    let quad = QuadratureRule::new(g.dim(), REFERENCE_DEGREE);
    let (mut ep, mut eu) = (T::zero(), T::zero());
    let mut accumulate = |x: Vec2<T>, w: T, kc: usize, ref_grad: Vec2<T>, ref_u: Vec2<T>| -> Result<()> {
        let perm = cell_permeability(domain, g, i, kc, x);
        let dg = ref_grad - p1_gradient(g, kc, pot.fields[i].cell_coeffs(kc));
        ep += w * dg.dot(perm.apply(dg));
        let du = ref_u - rt0_eval_grid(g, &flux, kc, x)?;
        eu += w * du.dot(perm.inverse().apply(du));
        Ok(())
    };
    match reference {
        Reference::Analytic(a) => {
            for k in 0..g.n_cells() {
                let v = g.cell_vertices(k);
                for (x, w) in quad.mapped(&v[..=g.dim()], g.cell_measure(k)) {
                    let grad = restrict(g, k, (a.gradient[i])(x));
                    let u = -cell_permeability(domain, g, i, k, x).apply(grad);
                    accumulate(x, w, k, grad, u)?;
                }
            }
        }
        Reference::Surrogate(s) => {
            let fg = &s.bundle.subdomain_grids[i];
            let fflux = s.solution.full_flux(i);
            let tg = build_transfer(g, fg)?;
            for t in 0..tg.n_cells() {
                let (kc, kf) = (tg.parent(Parent::Src, t), tg.parent(Parent::Dst, t));
                let grad = p1_gradient(fg, kf, s.potential.fields[i].cell_coeffs(kf));
                let v = tg.cell_vertices(t);
                for (x, w) in quad.mapped(&v[..=tg.dim()], tg.cell_measure(t)) {
                    let u = rt0_eval_grid(fg, &fflux, kf, x)?;
                    accumulate(x, w, kc, grad, u)?;
                }
            }
        }
    }
    Ok((ep, eu))
}

fn interface_errors<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    sol: &MixedSolution<T>,
    pot: &ConformingPotential<T>,
    reference: Reference<'_, T>,
    j: usize,
) -> Result<(T, T)> {
    let itf = domain.interface(j);
    let kappa = itf.normal_permeability;
    let coarse = InterfaceView::new(bundle, pot, sol, j, itf.hi, itf.lo);
    let fine = match reference {
        Reference::Surrogate(s) => Some(InterfaceView::new(&s.bundle, &s.potential, &s.solution, j, itf.hi, itf.lo)),
        Reference::Analytic(_) => None,
    };
    let tol = domain.eps_geom();
    let term = |x: Vec2<T>, c: (T, T, T), f: Option<(T, T, T)>| -> (T, T) {
        let (rp_hi, rp_lo, rl) = match (reference, f) {
            (Reference::Analytic(a), _) => ((a.trace[j])(x), (a.pressure[itf.lo])(x), (a.mortar[j])(x)),
            (_, Some(v)) => v,
            _ => unreachable!(),
        };
        let jump = (rp_lo - c.1) - (rp_hi - c.0);
        (kappa * jump * jump, (rl - c.2) * (rl - c.2) / kappa)
    };
    match &itf.geometry {
        Geometry::Point(p) => {
            let c = point_values(&coarse, *p)?;
            let f = fine.as_ref().map(|v| point_values(v, *p)).transpose()?;
            Ok(term(*p, c, f))
        }
        Geometry::Segment(seg) => {
            let mut grids: Vec<&SimplicialGrid<T>> = coarse.grids().to_vec();
            if let Some(v) = &fine {
                grids.extend(v.grids());
            }
            let ci = coarse.grids().map(|g| ChainIndex::new(g, *seg));
            let fi = fine.as_ref().map(|v| v.grids().map(|g| ChainIndex::new(g, *seg)));
            let quad = QuadratureRule::new(1, REFERENCE_DEGREE);
            let (mut ep, mut eu) = (T::zero(), T::zero());
            for (a, b) in interface_pieces(seg, &grids, tol) {
                let mid = (a + b) * T::lit(0.5);
                let ends = [seg.point_at(a), seg.point_at(b)];
                for (x, w) in quad.mapped(&ends, b - a) {
                    let c = coarse.values(&ci, mid, x, tol)?;
                    let f = match (&fine, &fi) {
                        (Some(v), Some(idx)) => Some(v.values(idx, mid, x, tol)?),
                        _ => None,
                    };
                    let (tp, tu) = term(x, c, f);
                    ep += w * tp;
                    eu += w * tu;
                }
            }
            Ok((ep, eu))
        }
        Geometry::Polygon(_) => Err(Error::InconsistentBundle(format!("interface {j} is two-dimensional"))),
    }
}

fn point_values<T: Real>(v: &InterfaceView<'_, T>, x: Vec2<T>) -> Result<(T, T, T)> {
    let (kh, _) = v.hi.face_cells(v.ib_faces[0]);
    Ok((v.pot_hi.eval(v.hi, kh, x), v.pot_lo.eval(v.lo, 0, x), v.mortar[0]))
}
