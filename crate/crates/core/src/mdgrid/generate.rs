//! Structured generation of matching grid bundles.

use std::collections::{HashMap, HashSet};

use super::{faces_to_grid, internal_faces, merge_breakpoints, CellMesh, FaceTag, GridBundle, SimplicialGrid};
use crate::geometry::{Segment, Vec2};
use crate::mdgeom::{Geometry, MdDomain};
use crate::{Error, Real, Result};

/// Meshes every subdomain and interface of `domain` with target size `h`
/// so that all coupling triplets are geometrically matching.
///
/// Two-dimensional subdomains must be axis-aligned rectangles; they are
/// triangulated in a criss-cross pattern and cut open along every
/// fracture, so fractures have to run along grid lines or cell diagonals.
pub fn generate_matching_bundle<T: Real>(domain: &MdDomain<T>, h: T) -> Result<GridBundle<T>> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::MeshGeneration(format!("mesh size must be positive, got {h}")));
    }
    let tol = domain.eps_geom();
    let n = domain.n_subdomains();
    let mut grids: Vec<Option<SimplicialGrid<T>>> = vec![None; n];

    for i in 0..n {
        let sub = domain.subdomain(i);
        match &sub.geometry {
            Geometry::Polygon(poly) => grids[i] = Some(mesh_rectangle(domain, i, poly, h, tol)?),
            Geometry::Point(p) => grids[i] = Some(SimplicialGrid::point(*p)),
            Geometry::Segment(_) => {}
        }
    }
    // fracture grids inherit the breakpoints of their host faces
    for i in 0..n {
        let sub = domain.subdomain(i);
        let Geometry::Segment(seg) = &sub.geometry else { continue };
        let mut lists = vec![vec![T::zero(), seg.length()]];
        for &j in domain.hat_s(i) {
            let hi = domain.interface(j).hi;
            let Some(g) = grids[hi].as_ref() else {
                return Err(Error::MeshGeneration(format!("interface {j}: host subdomain {hi} is not meshed")));
            };
            let faces = internal_faces(g, j);
            lists.push(
                faces
                    .iter()
                    .flat_map(|&f| g.face_nodes(f).to_vec())
                    .map(|nd| seg.param(g.nodes()[nd]))
                    .collect(),
            );
        }
        if lists.len() == 1 {
            let m = (seg.length() / h).round().to_usize().unwrap_or(1).max(1);
            lists.push((0..=m).map(|k| seg.length() * T::from_usize_lossy(k) / T::from_usize_lossy(m)).collect());
        }
        let mut params = merge_breakpoints(&lists, tol);
        params.retain(|&s| s >= -tol && s <= seg.length() + tol);
        *params.first_mut().unwrap() = T::zero();
        *params.last_mut().unwrap() = seg.length();
        let mut g = SimplicialGrid::chain(seg, &params)?;
        tag_chain_ends(domain, i, &mut g, tol)?;
        grids[i] = Some(g);
    }
    let subdomain_grids: Vec<SimplicialGrid<T>> = grids.into_iter().map(|g| g.unwrap()).collect();

    let mut interface_grids = Vec::with_capacity(domain.n_interfaces());
    let mut internal_boundary_grids = Vec::with_capacity(domain.n_interfaces());
    let mut internal_boundary_faces = Vec::with_capacity(domain.n_interfaces());
    for j in 0..domain.n_interfaces() {
        let itf = domain.interface(j);
        let hi = &subdomain_grids[itf.hi];
        let faces = internal_faces(hi, j);
        if faces.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        let (ib, host) = faces_to_grid(hi, &faces, &itf.geometry)?;
        internal_boundary_grids.push(ib);
        internal_boundary_faces.push(host);
        let mut g = subdomain_grids[itf.lo].duplicate();
        for f in 0..g.n_faces() {
            if let FaceTag::Internal(_) = g.tag(f) {
                g.set_tag(f, FaceTag::Neumann);
            }
        }
        interface_grids.push(g);
    }
    Ok(GridBundle {
        subdomain_grids,
        interface_grids,
        internal_boundary_grids,
        internal_boundary_faces,
    })
}

fn mesh_rectangle<T: Real>(domain: &MdDomain<T>, i: usize, poly: &[Vec2<T>], h: T, tol: T) -> Result<SimplicialGrid<T>> {
    let xs: Vec<T> = poly.iter().map(|p| p.x).collect();
    let ys: Vec<T> = poly.iter().map(|p| p.y).collect();
    let (x0, x1) = (xs.iter().copied().fold(T::infinity(), T::min), xs.iter().copied().fold(T::neg_infinity(), T::max));
    let (y0, y1) = (ys.iter().copied().fold(T::infinity(), T::min), ys.iter().copied().fold(T::neg_infinity(), T::max));
    let is_rect = poly.len() == 4
        && poly
            .iter()
            .all(|p| ((p.x - x0).abs() <= tol || (p.x - x1).abs() <= tol) && ((p.y - y0).abs() <= tol || (p.y - y1).abs() <= tol));
    if !is_rect {
        return Err(Error::MeshGeneration(format!("subdomain {i}: only axis-aligned rectangles can be meshed")));
    }
    let count = |len: T| (len / h).round().to_usize().unwrap_or(1).max(1);
    let (nx, ny) = (count(x1 - x0), count(y1 - y0));
    let dx = (x1 - x0) / T::from_usize_lossy(nx);
    let dy = (y1 - y0) / T::from_usize_lossy(ny);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
    for b in 0..=ny {
        for a in 0..=nx {
            nodes.push(Vec2::new(x0 + dx * T::from_usize_lossy(a), y0 + dy * T::from_usize_lossy(b)));
        }
    }
    let vid = |a: usize, b: usize| b * (nx + 1) + a;
    let mut cells: Vec<[usize; 3]> = Vec::with_capacity(4 * nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            let c = nodes.len();
            nodes.push(Vec2::new(
                x0 + dx * (T::from_usize_lossy(a) + T::lit(0.5)),
                y0 + dy * (T::from_usize_lossy(b) + T::lit(0.5)),
            ));
            let (v00, v10, v11, v01) = (vid(a, b), vid(a + 1, b), vid(a + 1, b + 1), vid(a, b + 1));
            cells.extend([[v00, v10, c], [v10, v11, c], [v11, v01, c], [v01, v00, c]]);
        }
    }

    let fractures: Vec<(usize, Segment<T>)> = domain
        .check_s(i)
        .iter()
        .filter_map(|&j| domain.interface(j).geometry.as_segment().map(|s| (j, s)))
        .collect();

    // edges along fractures
    let mut cut: HashSet<(usize, usize)> = HashSet::new();
    for c in &cells {
        for e in 0..3 {
            let (p, q) = (c[e], c[(e + 1) % 3]);
            let key = (p.min(q), p.max(q));
            if cut.contains(&key) {
                continue;
            }
            if fractures.iter().any(|(_, s)| s.contains(nodes[p], tol) && s.contains(nodes[q], tol)) {
                cut.insert(key);
            }
        }
    }
    for (j, s) in &fractures {
        let len: T = cut
            .iter()
            .filter(|(p, q)| s.contains(nodes[*p], tol) && s.contains(nodes[*q], tol))
            .map(|(p, q)| nodes[*p].dist(nodes[*q]))
            .sum();
        if (len - s.length()).abs() > T::lit(1e-9) * s.length() {
            return Err(Error::MeshGeneration(format!(
                "interface {j}: fracture is not resolved by the h = {h} grid edges"
            )));
        }
    }

    split_along_cuts(&mut nodes, &mut cells, &cut);

    let mut grid = SimplicialGrid::new(2, nodes, cells.iter().map(|c| c.to_vec()).collect())?;
    tag_rectangle_faces(domain, i, &mut grid, &fractures, tol)?;
    Ok(grid)
}

/// Duplicates nodes so that triangles on opposite sides of a cut edge no
/// longer share it. Incident triangles of a node are grouped into classes
/// connected through non-cut edges; each extra class gets its own copy.
fn split_along_cuts<T: Real>(nodes: &mut Vec<Vec2<T>>, cells: &mut [[usize; 3]], cut: &HashSet<(usize, usize)>) {
    if cut.is_empty() {
        return;
    }
    let mut cut_nodes: HashSet<usize> = HashSet::new();
    for &(p, q) in cut {
        cut_nodes.insert(p);
        cut_nodes.insert(q);
    }
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, c) in cells.iter().enumerate() {
        for &v in c {
            if cut_nodes.contains(&v) {
                incident.entry(v).or_default().push(k);
            }
        }
    }
    let mut order: Vec<usize> = incident.keys().copied().collect();
    order.sort_unstable();
    for v in order {
        let tris = &incident[&v];
        let m = tris.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        // triangles around v sharing an edge (v, w) that is not cut
        let mut by_edge: HashMap<usize, usize> = HashMap::new();
        for (a, &k) in tris.iter().enumerate() {
            for &w in &cells[k] {
                if w == v || cut.contains(&(v.min(w), v.max(w))) {
                    continue;
                }
                if let Some(&b) = by_edge.get(&w) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                } else {
                    by_edge.insert(w, a);
                }
            }
        }
        let mut copy_of_root: HashMap<usize, usize> = HashMap::new();
        let mut first = true;
        let roots: Vec<usize> = (0..m).map(|a| find(&mut parent, a)).collect();
        let mut seen_roots: Vec<usize> = Vec::new();
        for &r in &roots {
            if !seen_roots.contains(&r) {
                seen_roots.push(r);
            }
        }
        for r in seen_roots {
            let id = if first {
                first = false;
                v
            } else {
                nodes.push(nodes[v]);
                nodes.len() - 1
            };
            copy_of_root.insert(r, id);
        }
        for (a, &k) in tris.iter().enumerate() {
            let id = copy_of_root[&roots[a]];
            for slot in cells[k].iter_mut() {
                if *slot == v {
                    *slot = id;
                }
            }
        }
    }
}

fn tag_rectangle_faces<T: Real>(
    domain: &MdDomain<T>,
    i: usize,
    grid: &mut SimplicialGrid<T>,
    fractures: &[(usize, Segment<T>)],
    tol: T,
) -> Result<()> {
    let sub = domain.subdomain(i);
    for f in 0..grid.n_faces() {
        let fnodes = grid.face_nodes(f);
        let (p, q) = (grid.nodes()[fnodes[0]], grid.nodes()[fnodes[1]]);
        let (cell, other) = grid.face_cells(f);
        let on_fracture: Vec<usize> = fractures
            .iter()
            .filter(|(_, s)| s.contains(p, tol) && s.contains(q, tol))
            .map(|(j, _)| *j)
            .collect();
        if other.is_some() {
            if !on_fracture.is_empty() {
                return Err(Error::MeshGeneration(format!(
                    "subdomain {i}: fracture edge left uncut (fractures must span at least two edges at this h)"
                )));
            }
            continue;
        }
        let c = grid.cell_centroid(cell);
        let matching: Vec<usize> = on_fracture
            .iter()
            .copied()
            .filter(|&j| {
                let itf = domain.interface(j);
                let s = itf.geometry.as_segment().unwrap();
                itf.side == Some(s.side_of(c))
            })
            .collect();
        let tag = match matching.len() {
            1 => FaceTag::Internal(matching[0]),
            0 if !on_fracture.is_empty() => {
                return Err(Error::InvalidSpec(format!(
                    "subdomain {i}: fracture face without an interface on the matching side"
                )))
            }
            0 => {
                let mid = (p + q) * T::lit(0.5);
                let on = |g: &Geometry<T>| g.distance_to_point(p) <= tol && g.distance_to_point(q) <= tol && g.distance_to_point(mid) <= tol;
                let dir = sub.dirichlet.iter().any(|b| on(&b.geometry));
                let neu = sub.neumann.iter().any(|b| on(&b.geometry));
                match (dir, neu) {
                    (true, true) => {
                        return Err(Error::InvalidSpec(format!(
                            "subdomain {i}: Dirichlet and Neumann pieces overlap"
                        )))
                    }
                    (true, false) => FaceTag::Dirichlet,
                    _ => FaceTag::Neumann,
                }
            }
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "subdomain {i}: several interfaces claim the same side of a fracture"
                )))
            }
        };
        grid.set_tag(f, tag);
    }
    Ok(())
}

fn tag_chain_ends<T: Real>(domain: &MdDomain<T>, i: usize, grid: &mut SimplicialGrid<T>, tol: T) -> Result<()> {
    let sub = domain.subdomain(i);
    for f in 0..grid.n_faces() {
        if !grid.is_boundary_face(f) {
            continue;
        }
        let x = grid.nodes()[grid.face_nodes(f)[0]];
        let hits: Vec<usize> = domain
            .check_s(i)
            .iter()
            .copied()
            .filter(|&j| domain.interface(j).geometry.distance_to_point(x) <= tol)
            .collect();
        let tag = match hits.len() {
            0 => {
                let dir = sub.dirichlet_at(x, tol).is_some();
                if dir && sub.neumann_at(x, tol).is_some() {
                    return Err(Error::InvalidSpec(format!("subdomain {i}: Dirichlet and Neumann pieces overlap")));
                }
                if dir {
                    FaceTag::Dirichlet
                } else {
                    FaceTag::Neumann
                }
            }
            1 => FaceTag::Internal(hits[0]),
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "subdomain {i}: several interfaces attach to the same endpoint"
                )))
            }
        };
        grid.set_tag(f, tag);
    }
    Ok(())
}
