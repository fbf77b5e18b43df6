//! Conforming P1 potential from a mixed solution: cellwise gradient
//! recovery, Oswald averaging and Dirichlet enforcement.

use rayon::prelude::*;

use crate::geometry::Vec2;
use crate::mdgeom::MdDomain;
use crate::mdgrid::{CellMesh, FaceTag, GridBundle, SimplicialGrid};
use crate::mdsolve::{cell_permeability, rt0_eval_grid, MixedSolution};
use crate::project::PolyField;
use crate::{Real, Result};

/// Per-subdomain conforming P1 potential; 0D subdomains hold their
/// pressure value.
#[derive(Debug, Clone)]
pub struct ConformingPotential<T> {
    pub fields: Vec<PolyField<T>>,
    pub nodal: Vec<Vec<T>>,
}

impl<T: Real> ConformingPotential<T> {
    /// Largest inter-cell nodal discrepancy over all subdomains.
    pub fn jump_check(&self, bundle: &GridBundle<T>) -> T {
        self.fields
            .iter()
            .zip(&bundle.subdomain_grids)
            .map(|(f, g)| f.nodal_jump(g))
            .fold(T::zero(), T::max)
    }
}

/// Gradients of the barycentric coordinates of cell `k`.
pub fn barycentric_gradients<T: Real>(grid: &SimplicialGrid<T>, k: usize) -> [Vec2<T>; 3] {
    let v = grid.cell_vertices(k);
    match grid.dim() {
        0 => [Vec2::zero(); 3],
        1 => {
            let d = v[1] - v[0];
            let g = d / d.dot(d);
            [-g, g, Vec2::zero()]
        }
        _ => {
            let two_a = T::lit(2.0) * grid.cell_measure(k);
            let mut out = [Vec2::zero(); 3];
            for i in 0..3 {
                let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                out[i] = Vec2::new(a.y - b.y, b.x - a.x) / two_a;
            }
            out
        }
    }
}

/// Gradient of a P1 field on cell `k` from its vertex values.
pub fn p1_gradient<T: Real>(grid: &SimplicialGrid<T>, k: usize, coeffs: &[T]) -> Vec2<T> {
    let g = barycentric_gradients(grid, k);
    let mut out = Vec2::zero();
    for (i, &c) in coeffs.iter().enumerate().take(grid.dim() + 1) {
        out += g[i] * c;
    }
    out
}

/// `−K⁻¹ u_h` at the barycentre of cell `k`.
pub fn cell_gradient<T: Real>(
    sol: &MixedSolution<T>,
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
    i: usize,
    k: usize,
) -> Result<Vec2<T>> {
    let g = &bundle.subdomain_grids[i];
    cell_gradient_with(domain, g, i, k, &sol.full_flux(i))
}

fn cell_gradient_with<T: Real>(domain: &MdDomain<T>, g: &SimplicialGrid<T>, i: usize, k: usize, flux: &[T]) -> Result<Vec2<T>> {
    if g.dim() == 0 {
        return Ok(Vec2::zero());
    }
    let c = g.cell_centroid(k);
    let u = rt0_eval_grid(g, flux, k, c)?;
    Ok(-cell_permeability(domain, g, i, k, c).inverse().apply(u))
}

/// Broken P1 candidates `p_K + ∇p_K · (x − x_K)` of subdomain `i`.
pub fn candidate_field<T: Real>(sol: &MixedSolution<T>, domain: &MdDomain<T>, bundle: &GridBundle<T>, i: usize) -> Result<PolyField<T>> {
    let g = &bundle.subdomain_grids[i];
    let flux = sol.full_flux(i);
    let mut coeffs = Vec::with_capacity(g.n_cells() * (g.dim() + 1));
    for k in 0..g.n_cells() {
        let grad = cell_gradient_with(domain, g, i, k, &flux)?;
        let c = g.cell_centroid(k);
        let v = g.cell_vertices(k);
        for x in &v[..=g.dim()] {
            coeffs.push(sol.pressure[i][k] + grad.dot(*x - c));
        }
    }
    PolyField::new(g, 1, coeffs, false)
}

/// Arithmetic mean of the cell values at every node.
pub fn oswald_average<T: Real>(grid: &SimplicialGrid<T>, field: &PolyField<T>) -> Vec<T> {
    let mut sum = vec![T::zero(); grid.n_nodes()];
    let mut count = vec![0usize; grid.n_nodes()];
    for k in 0..grid.n_cells() {
        for (a, &n) in grid.cell_nodes(k).iter().enumerate() {
            sum[n] += field.cell_coeffs(k)[a];
            count[n] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / T::from_usize_lossy(c) } else { s })
        .collect()
}

/// Overwrites the nodes of Dirichlet faces with the boundary data.
pub fn apply_dirichlet<T: Real>(domain: &MdDomain<T>, grid: &SimplicialGrid<T>, i: usize, nodal: &mut [T]) {
    let eps = domain.eps_geom();
    let sub = domain.subdomain(i);
    for f in 0..grid.n_faces() {
        if grid.tag(f) != FaceTag::Dirichlet {
            continue;
        }
        for &n in grid.face_nodes(f) {
            let x = grid.nodes()[n];
            if let Some(piece) = sub.dirichlet_at(x, eps) {
                nodal[n] = piece.value.eval(x);
            }
        }
    }
}

pub fn build_conforming_potential<T: Real>(
    sol: &MixedSolution<T>,
    domain: &MdDomain<T>,
    bundle: &GridBundle<T>,
) -> Result<ConformingPotential<T>> {
    let parts: Vec<(PolyField<T>, Vec<T>)> = (0..domain.n_subdomains())
        .into_par_iter()
        .map(|i| {
            let g = &bundle.subdomain_grids[i];
            let mut nodal = if g.dim() == 0 {
                vec![sol.pressure[i][0]; g.n_nodes()]
            } else {
                oswald_average(g, &candidate_field(sol, domain, bundle, i)?)
            };
            apply_dirichlet(domain, g, i, &mut nodal);
            Ok((PolyField::from_nodal(g, &nodal), nodal))
        })
        .collect::<Result<_>>()?;
    let (fields, nodal) = parts.into_iter().unzip();
    Ok(ConformingPotential { fields, nodal })
}
