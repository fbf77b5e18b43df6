//! Lowest-order mixed discretisation of the mixed-dimensional Darcy
//! problem: RT0 fluxes, P0 pressures and P0 mortar fluxes, coupled through
//! the projection operators of each interface.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::Vec2;
use crate::linalg::{CscMatrix, DenseLu, SparseLu, TripletMatrix};
use crate::mdgeom::{MdDomain, SymTensor};
use crate::mdgrid::{CellMesh, FaceTag, GridBundle, SimplicialGrid};
use crate::project::ProjectionCache;
use crate::quadrature::QuadratureRule;
use crate::{Error, Real, Result};

/// Role of a face in the flux space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceDof {
    /// Independent unknown with the given global index.
    Free(usize),
    /// Internal boundary face: value `Σ_k W[cell][k] λ_k` of interface
    /// `interface`, where `cell` indexes the internal boundary grid.
    Mortar { interface: usize, cell: usize },
    /// Neumann face, value fixed to zero.
    Zero,
}

/// Global numbering of the unknowns and the coupling maps between
/// interfaces and subdomains. Flux unknowns come first, then pressures,
/// then mortar fluxes.
#[derive(Debug, Clone)]
pub struct DofMap<T> {
    pub faces: Vec<Vec<FaceDof>>,
    pub cells: Vec<Vec<usize>>,
    pub mortars: Vec<Vec<usize>>,
    pub n_flux: usize,
    pub n_pressure: usize,
    pub n_mortar: usize,
    /// Per interface and internal boundary cell, overlap weights
    /// `|e ∩ c| / |e|` against mortar cells.
    pub internal_boundary_weights: Vec<Vec<Vec<(usize, T)>>>,
    /// Per interface and lower-dimensional cell, overlaps `|K ∩ c|`.
    pub lower_overlaps: Vec<Vec<Vec<(usize, T)>>>,
    /// `(hi, lo)` of every interface.
    pub neighbours: Vec<(usize, usize)>,
}

impl<T: Real> DofMap<T> {
    pub fn len(&self) -> usize {
        self.n_flux + self.n_pressure + self.n_mortar
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assembled saddle-point system.
#[derive(Debug, Clone)]
pub struct LinearSystem<T> {
    pub matrix: CscMatrix<T>,
    pub rhs: Vec<T>,
    pub dofs: Arc<DofMap<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Required relative residual `‖b − Ax‖₂ / ‖b‖₂`.
    pub tol: T,
    /// Systems with at most this many unknowns use a dense factorisation.
    pub dense_threshold: usize,
    pub max_refinement: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(1e3)),
            dense_threshold: 200,
            max_refinement: 4,
        }
    }
}

/// Discrete solution. Face fluxes are normal trace values in the direction
/// of each face's global normal; internal boundary faces are evaluated
/// from the mortar flux on request.
#[derive(Debug, Clone)]
pub struct MixedSolution<T> {
    pub flux: Vec<Vec<T>>,
    pub pressure: Vec<Vec<T>>,
    pub mortar: Vec<Vec<T>>,
    pub residual: T,
    pub dofs: Arc<DofMap<T>>,
}

impl<T: Real> MixedSolution<T> {
    /// Face fluxes of subdomain `i`, including the internal boundary faces
    /// driven by the current mortar values.
    pub fn full_flux(&self, i: usize) -> Vec<T> {
        let mut u = self.flux[i].clone();
        for (f, d) in self.dofs.faces[i].iter().enumerate() {
            match *d {
                FaceDof::Mortar { interface, cell } => {
                    u[f] = self.dofs.internal_boundary_weights[interface][cell]
                        .iter()
                        .map(|&(k, w)| w * self.mortar[interface][k])
                        .sum();
                }
                FaceDof::Zero => u[f] = T::zero(),
                FaceDof::Free(_) => {}
            }
        }
        u
    }

    /// `∫_K Σ_j D̃λ_j` over the interfaces whose lower neighbour is `i`.
    pub fn lower_source(&self, i: usize, k: usize) -> T {
        let mut s = T::zero();
        for (j, &(_, lo)) in self.dofs.neighbours.iter().enumerate() {
            if lo == i {
                for &(c, w) in &self.dofs.lower_overlaps[j][k] {
                    s += w * self.mortar[j][c];
                }
            }
        }
        s
    }
}

/// Builds the transfer grids and local systems of every interface and
/// checks the bundle against the domain.
pub fn build_projection_caches<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>) -> Result<Vec<ProjectionCache<T>>> {
    check_bundle(domain, bundle)?;
    (0..domain.n_interfaces())
        .into_par_iter()
        .map(|j| {
            let itf = domain.interface(j);
            ProjectionCache::new(
                j,
                &bundle.interface_grids[j],
                &bundle.internal_boundary_grids[j],
                &bundle.subdomain_grids[itf.lo],
            )
        })
        .collect()
}

fn inconsistent<T>(msg: String) -> Result<T> {
    Err(Error::InconsistentBundle(msg))
}

fn check_bundle<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>) -> Result<()> {
    if bundle.subdomain_grids.len() != domain.n_subdomains() {
        return inconsistent(format!(
            "{} subdomain grids for {} subdomains",
            bundle.subdomain_grids.len(),
            domain.n_subdomains()
        ));
    }
    let nj = domain.n_interfaces();
    if bundle.interface_grids.len() != nj || bundle.internal_boundary_grids.len() != nj || bundle.internal_boundary_faces.len() != nj {
        return inconsistent(format!("interface grid count differs from {nj} interfaces"));
    }
    for (i, g) in bundle.subdomain_grids.iter().enumerate() {
        if g.dim() != domain.subdomain(i).dim {
            return inconsistent(format!("grid of subdomain {i} has dimension {}", g.dim()));
        }
    }
    for j in 0..nj {
        let itf = domain.interface(j);
        let hi = &bundle.subdomain_grids[itf.hi];
        let ib = &bundle.internal_boundary_grids[j];
        if bundle.interface_grids[j].dim() != itf.dim || ib.dim() != itf.dim {
            return inconsistent(format!("grids of interface {j} have the wrong dimension"));
        }
        let faces = &bundle.internal_boundary_faces[j];
        if faces.len() != ib.n_cells() {
            return inconsistent(format!("internal boundary map of interface {j} has {} entries", faces.len()));
        }
        for &f in faces {
            if f >= hi.n_faces() || hi.tag(f) != FaceTag::Internal(j) || !hi.is_boundary_face(f) {
                return inconsistent(format!("host face {f} of interface {j} is not an internal boundary face"));
            }
        }
        if faces.len() != (0..hi.n_faces()).filter(|&f| hi.tag(f) == FaceTag::Internal(j)).count() {
            return inconsistent(format!("internal boundary grid of interface {j} misses host faces"));
        }
    }
    Ok(())
}

/// Permeability acting on flux vectors of a cell: the full tensor for 2D
/// cells, the tangential value times the identity for 1D cells.
pub fn cell_permeability<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, k: usize, x: Vec2<T>) -> SymTensor<T> {
    let kx = domain.subdomain(i).permeability.eval(x);
    match grid.dim() {
        1 => {
            let v = grid.cell_vertices(k);
            SymTensor::isotropic(kx.tangential((v[1] - v[0]).normalized()))
        }
        _ => kx,
    }
}

/// Local RT0 basis function of face `a` of cell `k`, oriented outward.
pub fn rt0_local_basis<T: Real>(grid: &SimplicialGrid<T>, k: usize, a: usize, x: Vec2<T>) -> Vec2<T> {
    let v = grid.cell_vertices(k);
    let f = grid.cell_faces(k)[a];
    let d = T::from_usize_lossy(grid.dim());
    (x - v[a]) * (grid.face_measure(f) / (d * grid.cell_measure(k)))
}

/// RT0 field of a subdomain grid with face values `flux` at `x` in cell
/// `k`.
pub fn rt0_eval_grid<T: Real>(grid: &SimplicialGrid<T>, flux: &[T], k: usize, x: Vec2<T>) -> Result<Vec2<T>> {
    if grid.dim() == 0 {
        return Ok(Vec2::zero());
    }
    let v = grid.cell_vertices(k);
    let tol = T::lit(1e-9);
    let bary = grid.barycentric(k, x);
    let off_line = grid.dim() == 1 && {
        let seg = crate::geometry::Segment::new(v[0], v[1]);
        seg.distance_to_point(x) > tol * seg.length()
    };
    if off_line || bary[..=grid.dim()].iter().any(|&l| l < -tol) {
        return Err(Error::OutOfCell { cell: k });
    }
    let mut u = Vec2::zero();
    for (a, &f) in grid.cell_faces(k).iter().enumerate() {
        u += rt0_local_basis(grid, k, a, x) * (grid.face_sign(k, f) * flux[f]);
    }
    Ok(u)
}

/// Velocity of subdomain `i` at `x` in cell `k`.
pub fn rt0_eval<T: Real>(sol: &MixedSolution<T>, bundle: &GridBundle<T>, i: usize, k: usize, x: Vec2<T>) -> Result<Vec2<T>> {
    rt0_eval_grid(&bundle.subdomain_grids[i], &sol.full_flux(i), k, x)
}

/// `∫_K div u` of an RT0 field.
pub fn rt0_divergence_integral<T: Real>(grid: &SimplicialGrid<T>, flux: &[T], k: usize) -> T {
    if grid.dim() == 0 {
        return T::zero();
    }
    grid.cell_faces(k)
        .iter()
        .map(|&f| grid.face_sign(k, f) * flux[f] * grid.face_measure(f))
        .sum()
}

/// `∫_K f` with a degree-5 rule.
pub fn source_integral<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, k: usize) -> T {
    let quad = QuadratureRule::new(grid.dim(), 5);
    let v = grid.cell_vertices(k);
    let f = &domain.subdomain(i).source;
    quad.mapped(&v[..=grid.dim()], grid.cell_measure(k)).map(|(x, w)| f.eval(x) * w).sum()
}

pub fn build_dofs<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>, caches: &[ProjectionCache<T>]) -> Result<DofMap<T>> {
    check_bundle(domain, bundle)?;
    if caches.len() != domain.n_interfaces() {
        return inconsistent(format!("{} projection caches for {} interfaces", caches.len(), domain.n_interfaces()));
    }
    let mut host: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for j in 0..domain.n_interfaces() {
        let c = &caches[j];
        if c.interface_grid.id() != bundle.interface_grids[j].id()
            || c.internal_boundary_grid.id() != bundle.internal_boundary_grids[j].id()
            || c.lower_grid.id() != bundle.subdomain_grids[domain.interface(j).lo].id()
        {
            return inconsistent(format!("projection cache {j} was built for other grids"));
        }
        for (cell, &f) in bundle.internal_boundary_faces[j].iter().enumerate() {
            host.insert((domain.interface(j).hi, f), (j, cell));
        }
    }
    let mut n_flux = 0;
    let mut faces = Vec::with_capacity(domain.n_subdomains());
    let mut any_dirichlet = false;
    for (i, g) in bundle.subdomain_grids.iter().enumerate() {
        let mut row = Vec::with_capacity(g.n_faces());
        for f in 0..g.n_faces() {
            row.push(match g.tag(f) {
                FaceTag::Interior => {
                    n_flux += 1;
                    FaceDof::Free(n_flux - 1)
                }
                FaceTag::Dirichlet => {
                    any_dirichlet = true;
                    n_flux += 1;
                    FaceDof::Free(n_flux - 1)
                }
                FaceTag::Neumann => FaceDof::Zero,
                FaceTag::Internal(_) => {
                    let (interface, cell) = host[&(i, f)];
                    FaceDof::Mortar { interface, cell }
                }
            });
        }
        faces.push(row);
    }
    if !any_dirichlet {
        return Err(Error::SingularSystem("no face carries Dirichlet data; pressure is undetermined".into()));
    }
    let mut next = n_flux;
    let cells: Vec<Vec<usize>> = bundle
        .subdomain_grids
        .iter()
        .map(|g| {
            let r: Vec<usize> = (next..next + g.n_cells()).collect();
            next += g.n_cells();
            r
        })
        .collect();
    let n_pressure = next - n_flux;
    let mortars: Vec<Vec<usize>> = bundle
        .interface_grids
        .iter()
        .map(|g| {
            let r: Vec<usize> = (next..next + g.n_cells()).collect();
            next += g.n_cells();
            r
        })
        .collect();
    Ok(DofMap {
        faces,
        cells,
        mortars,
        n_flux,
        n_pressure,
        n_mortar: next - n_flux - n_pressure,
        internal_boundary_weights: caches.iter().map(|c| c.internal_boundary_weights()).collect(),
        lower_overlaps: caches.iter().map(|c| c.lower_overlaps()).collect(),
        neighbours: (0..domain.n_interfaces())
            .map(|j| (domain.interface(j).hi, domain.interface(j).lo))
            .collect(),
    })
}

type Triplets<T> = Vec<(usize, usize, T)>;

fn face_columns<T: Real>(dofs: &DofMap<T>, d: FaceDof) -> Vec<(usize, T)> {
    match d {
        FaceDof::Free(g) => vec![(g, T::one())],
        FaceDof::Mortar { interface, cell } => dofs.internal_boundary_weights[interface][cell]
            .iter()
            .map(|&(k, w)| (dofs.mortars[interface][k], w))
            .collect(),
        FaceDof::Zero => Vec::new(),
    }
}

fn assemble_subdomain<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>, dofs: &DofMap<T>, i: usize) -> Result<(Triplets<T>, Vec<(usize, T)>)> {
    let g = &bundle.subdomain_grids[i];
    let mut trip = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..g.n_cells() {
        let pk = dofs.cells[i][k];
        rhs.push((pk, -source_integral(domain, g, i, k)));
        if g.dim() == 0 {
            continue;
        }
        let n = g.dim() + 1;
        let quad = QuadratureRule::new(g.dim(), 2);
        let v = g.cell_vertices(k);
        let mut a_loc = [[T::zero(); 3]; 3];
        for (x, w) in quad.mapped(&v[..n], g.cell_measure(k)) {
            let kinv = cell_permeability(domain, g, i, k, x).inverse();
            let psi: Vec<Vec2<T>> = (0..n).map(|a| rt0_local_basis(g, k, a, x)).collect();
            for a in 0..n {
                let ka = kinv.apply(psi[a]);
                for b in 0..n {
                    a_loc[a][b] += w * ka.dot(psi[b]);
                }
            }
        }
        let faces = g.cell_faces(k);
        let cols: Vec<Vec<(usize, T)>> = faces.iter().map(|&f| face_columns(dofs, dofs.faces[i][f])).collect();
        let sign: Vec<T> = faces.iter().map(|&f| g.face_sign(k, f)).collect();
        for a in 0..n {
            for b in 0..n {
                let val = a_loc[a][b] * sign[a] * sign[b];
                for &(ga, ca) in &cols[a] {
                    for &(gb, cb) in &cols[b] {
                        trip.push((ga, gb, val * ca * cb));
                    }
                }
            }
            let div = -sign[a] * g.face_measure(faces[a]);
            for &(ga, ca) in &cols[a] {
                trip.push((pk, ga, div * ca));
                trip.push((ga, pk, div * ca));
            }
        }
    }
    let eps = domain.eps_geom();
    for f in 0..g.n_faces() {
        if g.tag(f) != FaceTag::Dirichlet {
            continue;
        }
        let FaceDof::Free(gf) = dofs.faces[i][f] else { unreachable!() };
        let piece = domain
            .subdomain(i)
            .dirichlet_at(g.face_centroid(f), eps)
            .ok_or_else(|| Error::InconsistentBundle(format!("Dirichlet face {f} of subdomain {i} has no boundary data")))?;
        let val = face_integral(g, f, |x| piece.value.eval(x));
        rhs.push((gf, -val));
    }
    Ok((trip, rhs))
}

/// `∫_e φ` over face `f` with a degree-5 rule (point value for point faces).
pub fn face_integral<T: Real>(g: &SimplicialGrid<T>, f: usize, phi: impl Fn(Vec2<T>) -> T) -> T {
    let nodes: Vec<Vec2<T>> = g.face_nodes(f).iter().map(|&n| g.nodes()[n]).collect();
    let quad = QuadratureRule::new(nodes.len() - 1, 5);
    quad.mapped(&nodes, g.face_measure(f)).map(|(x, w)| phi(x) * w).sum()
}

/// Assembles the symmetric saddle-point system
/// `[A −Bᵀ; −B 0]` in the unknowns (free fluxes, mortar fluxes | pressures).
pub fn assemble<T: Real>(domain: &MdDomain<T>, bundle: &GridBundle<T>, caches: &[ProjectionCache<T>]) -> Result<LinearSystem<T>> {
    let dofs = build_dofs(domain, bundle, caches)?;
    let n = dofs.len();
    let parts: Vec<(Triplets<T>, Vec<(usize, T)>)> = (0..domain.n_subdomains())
        .into_par_iter()
        .map(|i| assemble_subdomain(domain, bundle, &dofs, i))
        .collect::<Result<_>>()?;
    let mut tm = TripletMatrix::new(n, n);
    let mut rhs = vec![T::zero(); n];
    for (trip, r) in parts {
        for (a, b, v) in trip {
            tm.push(a, b, v);
        }
        for (a, v) in r {
            rhs[a] += v;
        }
    }
    for j in 0..domain.n_interfaces() {
        let itf = domain.interface(j);
        let ig = &bundle.interface_grids[j];
        for c in 0..ig.n_cells() {
            let g = dofs.mortars[j][c];
            tm.push(g, g, ig.cell_measure(c) / itf.normal_permeability);
        }
        for (k, row) in dofs.lower_overlaps[j].iter().enumerate() {
            let pk = dofs.cells[itf.lo][k];
            for &(c, w) in row {
                let g = dofs.mortars[j][c];
                tm.push(pk, g, w);
                tm.push(g, pk, w);
            }
        }
    }
    Ok(LinearSystem {
        matrix: tm.to_csc(),
        rhs,
        dofs: Arc::new(dofs),
    })
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Relative residual `‖b − Ax‖₂ / ‖b‖₂` (absolute when `b = 0`).
pub fn relative_residual<T: Real>(a: &CscMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.mul_vec(x);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let nb = norm2(b);
    if nb > T::zero() {
        norm2(&r) / nb
    } else {
        norm2(&r)
    }
}

/// Direct solve with iterative refinement.
pub fn solve<T: Real>(system: &LinearSystem<T>, opts: &SolverOptions<T>) -> Result<MixedSolution<T>> {
    let n = system.rhs.len();
    let a = &system.matrix;
    let sing_tol = T::epsilon() * T::lit(1e3);
    let solver: Box<dyn Fn(&[T]) -> Vec<T>> = if n <= opts.dense_threshold {
        let lu = DenseLu::new(n, &a.to_dense(), sing_tol)
            .ok_or_else(|| Error::SingularSystem("dense factorisation met a vanishing pivot".into()))?;
        Box::new(move |b| lu.solve(b))
    } else {
        let lu = SparseLu::factor(a, T::lit(0.1), sing_tol)
            .map_err(|k| Error::SingularSystem(format!("vanishing pivot at elimination step {k}")))?;
        Box::new(move |b| lu.solve(b))
    };
    let mut x = solver(&system.rhs);
    let mut res = relative_residual(a, &x, &system.rhs);
    for _ in 0..opts.max_refinement {
        if res <= opts.tol * T::lit(1e-2) || !res.is_finite() {
            break;
        }
        let ax = a.mul_vec(&x);
        let r: Vec<T> = system.rhs.iter().zip(&ax).map(|(&b, &y)| b - y).collect();
        let dx = solver(&r);
        let cand: Vec<T> = x.iter().zip(&dx).map(|(&a, &b)| a + b).collect();
        let cres = relative_residual(a, &cand, &system.rhs);
        if !(cres < res) {
            break;
        }
        x = cand;
        res = cres;
    }
    if !(res <= opts.tol) {
        return Err(Error::SingularSystem(format!("relative residual {:e} above tolerance", res.to_f64_lossy())));
    }
    Ok(solution_from_vector(&system.dofs, &x, res))
}

pub fn solution_from_vector<T: Real>(dofs: &Arc<DofMap<T>>, x: &[T], residual: T) -> MixedSolution<T> {
    let flux = dofs
        .faces
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| match *d {
                    FaceDof::Free(g) => x[g],
                    _ => T::zero(),
                })
                .collect()
        })
        .collect();
    let pick = |rows: &Vec<Vec<usize>>| rows.iter().map(|r| r.iter().map(|&g| x[g]).collect()).collect();
    let mut sol = MixedSolution {
        flux,
        pressure: pick(&dofs.cells),
        mortar: pick(&dofs.mortars),
        residual,
        dofs: dofs.clone(),
    };
    for i in 0..sol.flux.len() {
        sol.flux[i] = sol.full_flux(i);
    }
    sol
}

/// Assembles and solves in one step, building the projection caches.
pub fn solve_problem<T: Real>(
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    opts: &SolverOptions<T>,
) -> Result<(MixedSolution<T>, Vec<ProjectionCache<T>>)> {
    let caches = build_projection_caches(domain, bundle)?;
    let sys = assemble(domain, bundle, &caches)?;
    Ok((solve(&sys, opts)?, caches))
}

#[derive(Debug, Clone)]
pub struct ConservationReport<T> {
    /// `|∫_K (div u − Σ D̃λ − f)|` per subdomain and cell.
    pub per_cell: Vec<Vec<T>>,
    pub max: T,
}

/// Cellwise mass balance of a solution, with internal boundary fluxes taken
/// from the current mortar values.
pub fn check_local_conservation<T: Real>(sol: &MixedSolution<T>, domain: &MdDomain<T>, bundle: &GridBundle<T>) -> ConservationReport<T> {
    let per_cell: Vec<Vec<T>> = (0..domain.n_subdomains())
        .into_par_iter()
        .map(|i| {
            let g = &bundle.subdomain_grids[i];
            let u = sol.full_flux(i);
            (0..g.n_cells())
                .map(|k| (rt0_divergence_integral(g, &u, k) - sol.lower_source(i, k) - source_integral(domain, g, i, k)).abs())
                .collect()
        })
        .collect();
    let max = per_cell.iter().flatten().fold(T::zero(), |m, &v| m.max(v));
    ConservationReport { per_cell, max }
}
