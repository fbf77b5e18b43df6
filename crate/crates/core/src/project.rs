//! Discrete projection operators between interface grids and the grids
//! they couple: prolongation, Scott–Zhang quasi-interpolation, local L2
//! projection and mass-constrained L2 projection, and the six compositions
//! used for potentials and fluxes.

use crate::linalg::solve_dense;
use crate::mdgrid::{CellMesh, FaceTag, SimplicialGrid};
use crate::quadrature::QuadratureRule;
use crate::transfer::{build_transfer, Parent, TransferGrid};
use crate::{Error, Real, Result};

/// Broken polynomial field of degree 0 or 1 on a grid. Degree-1
/// coefficients are nodal values at the cell vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField<T> {
    grid_id: u64,
    dim: usize,
    degree: usize,
    coeffs: Vec<T>,
    conforming: bool,
}

impl<T: Real> PolyField<T> {
    pub fn new<M: CellMesh<T> + ?Sized>(mesh: &M, degree: usize, coeffs: Vec<T>, conforming: bool) -> Result<Self> {
        if degree > 1 {
            return Err(Error::GridMismatch(format!("polynomial degree {degree} not supported")));
        }
        let stride = if degree == 0 { 1 } else { mesh.dim() + 1 };
        if coeffs.len() != stride * mesh.n_cells() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for {} cells of stride {stride}",
                coeffs.len(),
                mesh.n_cells()
            )));
        }
        Ok(Self {
            grid_id: mesh.grid_id(),
            dim: mesh.dim(),
            degree,
            coeffs,
            conforming: conforming || degree == 0 && mesh.n_cells() <= 1,
        })
    }

    /// Piecewise constant field from cell values.
    pub fn from_cell_values<M: CellMesh<T> + ?Sized>(mesh: &M, values: Vec<T>) -> Result<Self> {
        Self::new(mesh, 0, values, false)
    }

    pub fn constant<M: CellMesh<T> + ?Sized>(mesh: &M, degree: usize, c: T) -> Self {
        let stride = if degree == 0 { 1 } else { mesh.dim() + 1 };
        Self::new(mesh, degree, vec![c; stride * mesh.n_cells()], true).unwrap()
    }

    /// Conforming P1 field from nodal values.
    pub fn from_nodal(grid: &SimplicialGrid<T>, nodal: &[T]) -> Self {
        let mut coeffs = Vec::with_capacity(grid.n_cells() * (grid.dim() + 1));
        for k in 0..grid.n_cells() {
            coeffs.extend(grid.cell_nodes(k).iter().map(|&n| nodal[n]));
        }
        Self::new(grid, 1, coeffs, true).unwrap()
    }

    /// Interpolant of `f`: vertex values for degree 1, centroid values for
    /// degree 0.
    pub fn interpolate<M: CellMesh<T> + ?Sized>(mesh: &M, degree: usize, f: impl Fn(crate::geometry::Vec2<T>) -> T) -> Self {
        let mut coeffs = Vec::new();
        for k in 0..mesh.n_cells() {
            if degree == 0 {
                coeffs.push(f(mesh.cell_centroid(k)));
            } else {
                let v = mesh.cell_vertices(k);
                coeffs.extend(v[..=mesh.dim()].iter().map(|&x| f(x)));
            }
        }
        Self::new(mesh, degree, coeffs, false).unwrap()
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    pub fn stride(&self) -> usize {
        if self.degree == 0 {
            1
        } else {
            self.dim + 1
        }
    }

    pub fn n_cells(&self) -> usize {
        self.coeffs.len() / self.stride()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn cell_coeffs(&self, k: usize) -> &[T] {
        let s = self.stride();
        &self.coeffs[k * s..(k + 1) * s]
    }

    /// Value on cell `k` at barycentric coordinates `bary`.
    pub fn eval_bary(&self, k: usize, bary: &[T; 3]) -> T {
        let c = self.cell_coeffs(k);
        if self.degree == 0 {
            c[0]
        } else {
            c.iter().zip(bary).map(|(&a, &b)| a * b).sum()
        }
    }

    pub fn eval<M: CellMesh<T> + ?Sized>(&self, mesh: &M, k: usize, x: crate::geometry::Vec2<T>) -> T {
        self.eval_bary(k, &mesh.barycentric(k, x))
    }

    /// `∫_K w`.
    pub fn integral<M: CellMesh<T> + ?Sized>(&self, mesh: &M, k: usize) -> T {
        let c = self.cell_coeffs(k);
        let mean = c.iter().copied().sum::<T>() / T::from_usize_lossy(c.len());
        mean * mesh.cell_measure(k)
    }

    pub fn check_on<M: CellMesh<T> + ?Sized>(&self, mesh: &M, what: &str) -> Result<()> {
        if self.grid_id != mesh.grid_id() {
            return Err(Error::GridMismatch(format!("{what}: field lives on grid {}, expected {}", self.grid_id, mesh.grid_id())));
        }
        Ok(())
    }

    /// Largest disagreement of nodal values between cells sharing a node.
    pub fn nodal_jump(&self, grid: &SimplicialGrid<T>) -> T {
        if self.degree == 0 {
            return T::zero();
        }
        let mut seen: Vec<Option<T>> = vec![None; grid.n_nodes()];
        let mut worst = T::zero();
        for k in 0..grid.n_cells() {
            for (i, &n) in grid.cell_nodes(k).iter().enumerate() {
                let v = self.cell_coeffs(k)[i];
                match seen[n] {
                    Some(w) => worst = worst.max((v - w).abs()),
                    None => seen[n] = Some(v),
                }
            }
        }
        worst
    }
}

/// Local P1 mass matrix `M_ij = |K|(1 + δ_ij)/((d+1)(d+2))` (row-major,
/// `(d+1)²` entries) or `[|K|]` for degree 0.
pub fn local_mass<T: Real>(dim: usize, degree: usize, measure: T) -> Vec<T> {
    if degree == 0 {
        return vec![measure];
    }
    let n = dim + 1;
    let denom = T::from_usize_lossy(n * (n + 1));
    let mut m = vec![measure / denom; n * n];
    for i in 0..n {
        m[i * n + i] = measure * T::lit(2.0) / denom;
    }
    m
}

/// Constraint vector `c_i = ∫_K φ_i`.
pub fn local_constraint<T: Real>(dim: usize, degree: usize, measure: T) -> Vec<T> {
    if degree == 0 {
        return vec![measure];
    }
    vec![measure / T::from_usize_lossy(dim + 1); dim + 1]
}

/// Per-cell mass matrices and constraint vectors of a target grid.
#[derive(Debug, Clone)]
pub struct LocalSystems<T> {
    pub dim: usize,
    pub degree: usize,
    pub mass: Vec<Vec<T>>,
    pub constraint: Vec<Vec<T>>,
}

impl<T: Real> LocalSystems<T> {
    pub fn new<M: CellMesh<T> + ?Sized>(mesh: &M, degree: usize) -> Result<Self> {
        let mut mass = Vec::with_capacity(mesh.n_cells());
        let mut constraint = Vec::with_capacity(mesh.n_cells());
        for k in 0..mesh.n_cells() {
            let m = mesh.cell_measure(k);
            if !(m > T::zero()) {
                return Err(Error::SingularMassMatrix { cell: k });
            }
            mass.push(local_mass(mesh.dim(), degree, m));
            constraint.push(local_constraint(mesh.dim(), degree, m));
        }
        Ok(Self {
            dim: mesh.dim(),
            degree,
            mass,
            constraint,
        })
    }
}

/// Restriction of a field on one parent grid of `tg` to the transfer cells.
pub fn prolong<T: Real, M: CellMesh<T> + ?Sized>(field: &PolyField<T>, parent: &M, tg: &TransferGrid<T>) -> Result<PolyField<T>> {
    field.check_on(parent, "prolong")?;
    let which = tg
        .role_of(field.grid_id())
        .ok_or_else(|| Error::GridMismatch("prolong: field is not on a parent of the transfer grid".into()))?;
    let mut coeffs = Vec::with_capacity(tg.n_cells() * field.stride());
    for k in 0..tg.n_cells() {
        let c = tg.parent(which, k);
        if field.degree() == 0 {
            coeffs.push(field.cell_coeffs(c)[0]);
        } else {
            let v = tg.cell_vertices(k);
            for x in &v[..=tg.dim()] {
                coeffs.push(field.eval(parent, c, *x));
            }
        }
    }
    PolyField::new(tg, field.degree(), coeffs, false)
}

/// `b_m = ∫_K φ_m w`, summed over the transfer children of target cell `K`.
fn moments<T: Real>(
    field: &PolyField<T>,
    tg: &TransferGrid<T>,
    which: Parent,
    target: &SimplicialGrid<T>,
    cell: usize,
    degree: usize,
    quad: &QuadratureRule<T>,
) -> Vec<T> {
    let n = if degree == 0 { 1 } else { target.dim() + 1 };
    let mut b = vec![T::zero(); n];
    let nv = tg.dim() + 1;
    for &t in tg.children(which, cell) {
        // target coordinates of the child vertices; quadrature points are
        // interpolated from these rather than located in absolute space
        let verts = tg.cell_vertices(t);
        let lam: Vec<[T; 3]> = verts[..nv].iter().map(|&v| target.barycentric(cell, v)).collect();
        let meas = tg.cell_measure(t);
        for (bq, w) in quad.iter() {
            let val = field.eval_bary(t, bq) * w * meas;
            if degree == 0 {
                b[0] += val;
            } else {
                for m in 0..n {
                    let phi: T = (0..nv).map(|i| bq[i] * lam[i][m]).sum();
                    b[m] += phi * val;
                }
            }
        }
    }
    b
}

fn target_role<T: Real>(field: &PolyField<T>, tg: &TransferGrid<T>, target: &SimplicialGrid<T>) -> Result<Parent> {
    field.check_on(tg, "projection input")?;
    tg.role_of(target.id())
        .ok_or_else(|| Error::GridMismatch("target is not a parent of the transfer grid".into()))
}

/// Scott–Zhang quasi-interpolant onto conforming P1 on `target`. Each node
/// uses the dual basis of its lowest-index adjacent cell; nodes flagged in
/// `point_trace` take the point value of the input instead.
pub fn scott_zhang<T: Real>(
    field: &PolyField<T>,
    tg: &TransferGrid<T>,
    target: &SimplicialGrid<T>,
    point_trace: Option<&[bool]>,
) -> Result<PolyField<T>> {
    let which = target_role(field, tg, target)?;
    let quad = QuadratureRule::new(tg.dim(), 2);
    let node_cells = target.node_cells();
    let n = target.dim() + 1;
    let mut nodal = vec![T::zero(); target.n_nodes()];
    let mut cache: Vec<Option<Vec<T>>> = vec![None; target.n_cells()];
    for z in 0..target.n_nodes() {
        let Some(&cell) = node_cells[z].iter().min() else { continue };
        let zloc = target.cell_nodes(cell).iter().position(|&m| m == z).unwrap();
        if point_trace.is_some_and(|p| p[z]) {
            let x = target.nodes()[z];
            let child = tg
                .children(which, cell)
                .iter()
                .copied()
                .find(|&t| tg.barycentric(t, x).iter().take(tg.dim() + 1).all(|&l| l >= T::lit(-1e-10)))
                .ok_or(Error::GridMismatch("node not covered by transfer children".into()))?;
            nodal[z] = field.eval(tg, child, x);
            continue;
        }
        if cache[cell].is_none() {
            let b = moments(field, tg, which, target, cell, 1, &quad);
            let m = local_mass(target.dim(), 1, target.cell_measure(cell));
            let dual = solve_dense(n, &m, &b).ok_or(Error::SingularMassMatrix { cell })?;
            cache[cell] = Some(dual);
        }
        nodal[z] = cache[cell].as_ref().unwrap()[zloc];
    }
    Ok(PolyField::from_nodal(target, &nodal))
}

/// Elementwise L2 projection onto broken `P_k(target)`.
pub fn l2_project<T: Real>(field: &PolyField<T>, tg: &TransferGrid<T>, target: &SimplicialGrid<T>, degree: usize) -> Result<PolyField<T>> {
    let which = target_role(field, tg, target)?;
    let quad = QuadratureRule::new(tg.dim(), 2);
    let n = if degree == 0 { 1 } else { target.dim() + 1 };
    let mut coeffs = Vec::with_capacity(n * target.n_cells());
    for k in 0..target.n_cells() {
        let b = moments(field, tg, which, target, k, degree, &quad);
        let m = local_mass(target.dim(), degree, target.cell_measure(k));
        coeffs.extend(solve_dense(n, &m, &b).ok_or(Error::SingularMassMatrix { cell: k })?);
    }
    PolyField::new(target, degree, coeffs, false)
}

/// Per target cell, the input mass collected from the transfer children.
pub fn child_masses<T: Real>(field: &PolyField<T>, tg: &TransferGrid<T>, which: Parent, n_target: usize) -> Vec<T> {
    (0..n_target)
        .map(|k| tg.children(which, k).iter().map(|&t| field.integral(tg, t)).sum())
        .collect()
}

/// L2 projection constrained to reproduce the input mass on every target
/// cell.
pub fn mass_constrained_project<T: Real>(
    field: &PolyField<T>,
    tg: &TransferGrid<T>,
    target: &SimplicialGrid<T>,
    degree: usize,
) -> Result<PolyField<T>> {
    let which = target_role(field, tg, target)?;
    let masses = child_masses(field, tg, which, target.n_cells());
    Ok(mass_constrained_project_with(field, tg, target, degree, &masses)?.0)
}

/// Solves `[M c; cᵀ 0][α; μ] = [b; m]` per target cell for prescribed
/// masses `m`; returns the field and the multipliers `μ`.
pub fn mass_constrained_project_with<T: Real>(
    field: &PolyField<T>,
    tg: &TransferGrid<T>,
    target: &SimplicialGrid<T>,
    degree: usize,
    masses: &[T],
) -> Result<(PolyField<T>, Vec<T>)> {
    let which = target_role(field, tg, target)?;
    let quad = QuadratureRule::new(tg.dim(), 2);
    let n = if degree == 0 { 1 } else { target.dim() + 1 };
    let mut coeffs = Vec::with_capacity(n * target.n_cells());
    let mut mult = Vec::with_capacity(target.n_cells());
    for k in 0..target.n_cells() {
        let b = moments(field, tg, which, target, k, degree, &quad);
        let meas = target.cell_measure(k);
        let m = local_mass(target.dim(), degree, meas);
        let c = local_constraint(target.dim(), degree, meas);
        let mut kkt = vec![T::zero(); (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                kkt[i * (n + 1) + j] = m[i * n + j];
            }
            kkt[i * (n + 1) + n] = c[i];
            kkt[n * (n + 1) + i] = c[i];
        }
        let mut rhs = b;
        rhs.push(masses[k]);
        let sol = solve_dense(n + 1, &kkt, &rhs).ok_or(Error::SingularMassMatrix { cell: k })?;
        coeffs.extend_from_slice(&sol[..n]);
        mult.push(sol[n]);
    }
    Ok((PolyField::new(target, degree, coeffs, false)?, mult))
}

/// Transfer grids and local systems of one coupling triplet.
#[derive(Debug, Clone)]
pub struct ProjectionCache<T> {
    pub interface: usize,
    pub interface_grid: SimplicialGrid<T>,
    pub internal_boundary_grid: SimplicialGrid<T>,
    pub lower_grid: SimplicialGrid<T>,
    /// Interface grid to internal boundary grid.
    pub transfer_hi: TransferGrid<T>,
    /// Interface grid to lower-dimensional grid.
    pub transfer_lo: TransferGrid<T>,
    pub systems_interface: LocalSystems<T>,
    pub systems_internal_boundary: LocalSystems<T>,
    pub systems_lower: LocalSystems<T>,
    interface_dirichlet: Vec<bool>,
}

impl<T: Real> ProjectionCache<T> {
    pub fn new(
        interface: usize,
        interface_grid: &SimplicialGrid<T>,
        internal_boundary_grid: &SimplicialGrid<T>,
        lower_grid: &SimplicialGrid<T>,
    ) -> Result<Self> {
        let transfer_hi = build_transfer(interface_grid, internal_boundary_grid)?;
        let transfer_lo = build_transfer(interface_grid, lower_grid)?;
        let mut interface_dirichlet = vec![false; interface_grid.n_nodes()];
        for f in 0..interface_grid.n_faces() {
            if interface_grid.tag(f) == FaceTag::Dirichlet {
                for &n in interface_grid.face_nodes(f) {
                    interface_dirichlet[n] = true;
                }
            }
        }
        Ok(Self {
            interface,
            systems_interface: LocalSystems::new(interface_grid, 1)?,
            systems_internal_boundary: LocalSystems::new(internal_boundary_grid, 1)?,
            systems_lower: LocalSystems::new(lower_grid, 1)?,
            interface_grid: interface_grid.clone(),
            internal_boundary_grid: internal_boundary_grid.clone(),
            lower_grid: lower_grid.clone(),
            transfer_hi,
            transfer_lo,
            interface_dirichlet,
        })
    }

    /// Interface-grid nodes lying on the Dirichlet boundary.
    pub fn interface_dirichlet_nodes(&self) -> &[bool] {
        &self.interface_dirichlet
    }

    /// Potential trace on the internal boundary grid to the interface grid.
    pub fn primal_to_interface_hi(&self, trace: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(trace, &self.internal_boundary_grid, &self.transfer_hi)?;
        scott_zhang(&p, &self.transfer_hi, &self.interface_grid, Some(&self.interface_dirichlet))
    }

    /// Lower-dimensional potential to the interface grid.
    pub fn primal_to_interface_lo(&self, field: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(field, &self.lower_grid, &self.transfer_lo)?;
        scott_zhang(&p, &self.transfer_lo, &self.interface_grid, Some(&self.interface_dirichlet))
    }

    pub fn dual_potential_to_interface_hi(&self, field: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(field, &self.internal_boundary_grid, &self.transfer_hi)?;
        l2_project(&p, &self.transfer_hi, &self.interface_grid, field.degree())
    }

    pub fn dual_potential_to_interface_lo(&self, field: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(field, &self.lower_grid, &self.transfer_lo)?;
        l2_project(&p, &self.transfer_lo, &self.interface_grid, field.degree())
    }

    /// Mortar flux to the internal boundary grid of the higher-dimensional
    /// neighbour.
    pub fn flux_to_internal_boundary(&self, mortar: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(mortar, &self.interface_grid, &self.transfer_hi)?;
        mass_constrained_project(&p, &self.transfer_hi, &self.internal_boundary_grid, mortar.degree())
    }

    /// Mortar flux to the lower-dimensional grid.
    pub fn flux_to_lower(&self, mortar: &PolyField<T>) -> Result<PolyField<T>> {
        let p = prolong(mortar, &self.interface_grid, &self.transfer_lo)?;
        mass_constrained_project(&p, &self.transfer_lo, &self.lower_grid, mortar.degree())
    }

    /// Overlap weights `W[e][k] = |children of e inside mortar cell k| / |e|`
    /// of the degree-0 flux map to the internal boundary grid, as sparse
    /// rows.
    pub fn internal_boundary_weights(&self) -> Vec<Vec<(usize, T)>> {
        overlap_weights(&self.transfer_hi, &self.internal_boundary_grid)
    }

    /// Overlaps `|t|` between lower-dimensional cells and mortar cells, as
    /// sparse rows per lower cell (unnormalised).
    pub fn lower_overlaps(&self) -> Vec<Vec<(usize, T)>> {
        let tg = &self.transfer_lo;
        (0..self.lower_grid.n_cells())
            .map(|k| merge_rows(tg.children(Parent::Dst, k).iter().map(|&t| (tg.parent(Parent::Src, t), tg.cell_measure(t)))))
            .collect()
    }
}

fn merge_rows<T: Real>(it: impl Iterator<Item = (usize, T)>) -> Vec<(usize, T)> {
    let mut row: Vec<(usize, T)> = Vec::new();
    for (c, w) in it {
        match row.iter_mut().find(|e| e.0 == c) {
            Some(e) => e.1 += w,
            None => row.push((c, w)),
        }
    }
    row
}

fn overlap_weights<T: Real>(tg: &TransferGrid<T>, target: &SimplicialGrid<T>) -> Vec<Vec<(usize, T)>> {
    (0..target.n_cells())
        .map(|e| {
            let meas = target.cell_measure(e);
            merge_rows(
                tg.children(Parent::Dst, e)
                    .iter()
                    .map(|&t| (tg.parent(Parent::Src, t), tg.cell_measure(t) / meas)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Segment, Vec2};
    use crate::transfer::build_transfer_1d;

    fn chain(params: &[f64]) -> SimplicialGrid<f64> {
        SimplicialGrid::chain(&Segment::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)), params).unwrap()
    }

    #[test]
    fn constrained_k0_is_overlap_average() {
        let src = chain(&[0.0, 0.5, 1.0]);
        let dst = chain(&[0.0, 0.25, 1.0]);
        let tg = build_transfer_1d(&src, &dst).unwrap();
        let nu = PolyField::from_cell_values(&src, vec![2.0, 4.0]).unwrap();
        let p = prolong(&nu, &src, &tg).unwrap();
        let out = mass_constrained_project(&p, &tg, &dst, 0).unwrap();
        assert!((out.coeffs()[0] - 2.0).abs() < 1e-15);
        assert!((out.coeffs()[1] - 10.0 / 3.0).abs() < 1e-14);
        let l2 = l2_project(&p, &tg, &dst, 0).unwrap();
        assert!((l2.coeffs()[1] - 10.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn elementwise_average_onto_single_cell() {
        let src = chain(&[0.0, 0.5, 1.0]);
        let dst = chain(&[0.0, 1.0]);
        let tg = build_transfer_1d(&src, &dst).unwrap();
        let w = prolong(&PolyField::from_cell_values(&src, vec![2.0, 4.0]).unwrap(), &src, &tg).unwrap();
        assert!((l2_project(&w, &tg, &dst, 0).unwrap().coeffs()[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn prolong_rejects_foreign_fields() {
        let src = chain(&[0.0, 0.5, 1.0]);
        let other = chain(&[0.0, 1.0]);
        let tg = build_transfer_1d(&src, &src.duplicate()).unwrap();
        let f = PolyField::constant(&other, 0, 1.0);
        assert!(matches!(prolong(&f, &other, &tg), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn scott_zhang_matches_explicit_dual_basis() {
        // three-cell target, discontinuous input on a finer transfer grid
        let target = chain(&[0.0, 0.3, 0.6, 1.0]);
        let other = chain(&[0.0, 0.2, 0.5, 0.8, 1.0]);
        let tg = build_transfer_1d(&other, &target).unwrap();
        let mut coeffs = Vec::new();
        for k in 0..tg.n_cells() {
            let v = tg.cell_vertices(k);
            coeffs.push(v[0].x * v[0].x + k as f64);
            coeffs.push(v[1].x * 3.0 - k as f64);
        }
        let w = PolyField::new(&tg, 1, coeffs, false).unwrap();
        let sz = scott_zhang(&w, &tg, &target, None).unwrap();
        // oracle: dual basis ψ_z = Σ_m (M⁻¹)_{zm} φ_m, integrated with 5-point
        // composite Simpson on each transfer child
        for z in 0..target.n_nodes() {
            let cell = if z == 0 { 0 } else { z - 1 };
            let loc = if z == 0 { 0 } else { 1 };
            let v = target.cell_vertices(cell);
            let (a, b) = (v[0].x, v[1].x);
            let h = b - a;
            let minv = [[4.0 / h, -2.0 / h], [-2.0 / h, 4.0 / h]];
            let psi = |x: f64| {
                let phi = [(b - x) / h, (x - a) / h];
                minv[loc][0] * phi[0] + minv[loc][1] * phi[1]
            };
            let mut acc = 0.0;
            for &t in tg.children(Parent::Dst, cell) {
                let tv = tg.cell_vertices(t);
                let (ta, tb) = (tv[0].x, tv[1].x);
                let f = |x: f64| psi(x) * w.eval(&tg, t, Vec2::new(x, 0.0));
                let n = 4;
                let hh = (tb - ta) / n as f64;
                let mut s = f(ta) + f(tb);
                for i in 1..n {
                    s += f(ta + i as f64 * hh) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                acc += s * hh / 3.0;
            }
            let got = sz.cell_coeffs(cell)[loc];
            assert!((got - acc).abs() < 1e-12, "node {z}: {got} vs {acc}");
        }
    }
}
