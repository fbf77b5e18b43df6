//! Simplicial grids of intrinsic dimension 0, 1 and 2 embedded in the
//! plane, and the bundle of grids attached to a mixed-dimensional domain.

mod generate;
pub mod io;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::geometry::{triangle_signed_area, Segment, Side, Vec2};
use crate::mdgeom::Geometry;
use crate::{Error, Real, Result};

pub use generate::generate_matching_bundle;

const NONE: usize = usize::MAX;

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_grid_id() -> u64 {
    NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed)
}

/// Classification of a grid face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceTag {
    Interior,
    Dirichlet,
    Neumann,
    /// Lies on the internal boundary towards interface `j`.
    Internal(usize),
}

/// Read access to the cells of a simplicial complex; implemented by
/// subdomain grids and transfer grids alike.
pub trait CellMesh<T: Real> {
    fn grid_id(&self) -> u64;
    fn dim(&self) -> usize;
    fn n_cells(&self) -> usize;
    /// Vertices of cell `k`; only the first `dim + 1` entries are meaningful.
    fn cell_vertices(&self, k: usize) -> [Vec2<T>; 3];
    fn cell_measure(&self, k: usize) -> T;

    fn cell_centroid(&self, k: usize) -> Vec2<T> {
        let v = self.cell_vertices(k);
        let n = self.dim() + 1;
        let mut c = Vec2::zero();
        for p in &v[..n] {
            c += *p;
        }
        c / T::from_usize_lossy(n)
    }

    /// Barycentric coordinates of `x` with respect to cell `k`. For
    /// segments the point is projected onto the supporting line.
    fn barycentric(&self, k: usize, x: Vec2<T>) -> [T; 3] {
        barycentric(self.dim(), &self.cell_vertices(k), x)
    }

    /// Diameter `h_K`: longest edge.
    fn cell_diameter(&self, k: usize) -> T {
        let v = self.cell_vertices(k);
        match self.dim() {
            0 => T::zero(),
            1 => v[0].dist(v[1]),
            _ => v[0].dist(v[1]).max(v[1].dist(v[2])).max(v[2].dist(v[0])),
        }
    }
}

pub fn barycentric<T: Real>(dim: usize, v: &[Vec2<T>; 3], x: Vec2<T>) -> [T; 3] {
    match dim {
        0 => [T::one(), T::zero(), T::zero()],
        1 => {
            let d = v[1] - v[0];
            let l1 = (x - v[0]).dot(d) / d.dot(d);
            [T::one() - l1, l1, T::zero()]
        }
        _ => {
            let area = triangle_signed_area(v[0], v[1], v[2]);
            let l0 = triangle_signed_area(x, v[1], v[2]) / area;
            let l1 = triangle_signed_area(v[0], x, v[2]) / area;
            [l0, l1, T::one() - l0 - l1]
        }
    }
}

/// Simplicial grid with face connectivity. Triangles are stored counter-
/// clockwise; local face `i` of a cell is opposite its local vertex `i`.
#[derive(Debug, Clone)]
pub struct SimplicialGrid<T> {
    id: u64,
    dim: usize,
    nodes: Vec<Vec2<T>>,
    cells: Vec<usize>,
    face_nodes: Vec<usize>,
    face_cells: Vec<[usize; 2]>,
    cell_faces: Vec<usize>,
    tags: Vec<FaceTag>,
    cell_measure: Vec<T>,
    face_measure: Vec<T>,
    face_normal: Vec<Vec2<T>>,
}

impl<T: Real> SimplicialGrid<T> {
    /// Builds a grid from nodes and cell connectivity (`dim + 1` node
    /// indices per cell). Boundary faces are tagged Neumann.
    pub fn new(dim: usize, nodes: Vec<Vec2<T>>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim > 2 {
            return Err(Error::MeshGeneration(format!("unsupported grid dimension {dim}")));
        }
        let nv = dim + 1;
        let mut flat = Vec::with_capacity(cells.len() * nv);
        for (k, c) in cells.iter().enumerate() {
            if c.len() != nv || c.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::MeshGeneration(format!("cell {k} has invalid connectivity")));
            }
            let mut c = c.clone();
            if dim == 2 && triangle_signed_area(nodes[c[0]], nodes[c[1]], nodes[c[2]]) < T::zero() {
                c.swap(1, 2);
            }
            flat.extend_from_slice(&c);
        }
        let mut g = Self {
            id: fresh_grid_id(),
            dim,
            nodes,
            cells: flat,
            face_nodes: Vec::new(),
            face_cells: Vec::new(),
            cell_faces: Vec::new(),
            tags: Vec::new(),
            cell_measure: Vec::new(),
            face_measure: Vec::new(),
            face_normal: Vec::new(),
        };
        g.build_faces();
        g.compute_geometry();
        for k in 0..g.n_cells() {
            if !(g.cell_measure[k] > T::zero()) {
                return Err(Error::MeshGeneration(format!("cell {k} has non-positive measure")));
            }
        }
        Ok(g)
    }

    /// A single-point grid.
    pub fn point(p: Vec2<T>) -> Self {
        Self::new(0, vec![p], vec![vec![0]]).expect("point grid")
    }

    /// Uniform or breakpoint-defined grid along a segment; `params` are
    /// sorted arc-length positions including both ends.
    pub fn chain(seg: &Segment<T>, params: &[T]) -> Result<Self> {
        let nodes: Vec<Vec2<T>> = params.iter().map(|&s| seg.point_at(s)).collect();
        let cells = (0..params.len().saturating_sub(1)).map(|k| vec![k, k + 1]).collect();
        Self::new(1, nodes, cells)
    }

    fn build_faces(&mut self) {
        let nv = self.dim + 1;
        let nc = self.n_cells();
        self.cell_faces = vec![NONE; nc * nv];
        if self.dim == 0 {
            return;
        }
        let mut map: HashMap<(usize, usize), usize> = HashMap::with_capacity(nc * nv);
        for k in 0..nc {
            for i in 0..nv {
                let key = match self.dim {
                    1 => (self.cells[k * nv + 1 - i], NONE),
                    _ => {
                        let a = self.cells[k * nv + (i + 1) % 3];
                        let b = self.cells[k * nv + (i + 2) % 3];
                        (a.min(b), a.max(b))
                    }
                };
                let f = *map.entry(key).or_insert_with(|| {
                    self.face_nodes.push(key.0);
                    if self.dim == 2 {
                        self.face_nodes.push(key.1);
                    }
                    self.face_cells.push([NONE, NONE]);
                    self.face_cells.len() - 1
                });
                let fc = &mut self.face_cells[f];
                if fc[0] == NONE {
                    fc[0] = k;
                } else {
                    fc[1] = k;
                }
                self.cell_faces[k * nv + i] = f;
            }
        }
        self.tags = self
            .face_cells
            .iter()
            .map(|c| if c[1] == NONE { FaceTag::Neumann } else { FaceTag::Interior })
            .collect();
    }

    fn compute_geometry(&mut self) {
        let nc = self.n_cells();
        self.cell_measure = (0..nc)
            .map(|k| {
                let v = self.cell_vertices(k);
                match self.dim {
                    0 => T::one(),
                    1 => v[0].dist(v[1]),
                    _ => triangle_signed_area(v[0], v[1], v[2]),
                }
            })
            .collect();
        let nf = self.face_cells.len();
        self.face_measure = Vec::with_capacity(nf);
        self.face_normal = Vec::with_capacity(nf);
        for f in 0..nf {
            let c0 = self.face_cells[f][0];
            let (measure, normal) = match self.dim {
                1 => {
                    let n = self.face_nodes[f];
                    let other = self.cell_nodes(c0).iter().copied().find(|&m| m != n).unwrap();
                    (T::one(), (self.nodes[n] - self.nodes[other]).normalized())
                }
                _ => {
                    let a = self.nodes[self.face_nodes[2 * f]];
                    let b = self.nodes[self.face_nodes[2 * f + 1]];
                    let mut nrm = (b - a).perp().normalized();
                    let mid = (a + b) * T::lit(0.5);
                    if nrm.dot(mid - self.cell_centroid(c0)) < T::zero() {
                        nrm = -nrm;
                    }
                    (a.dist(b), nrm)
                }
            };
            self.face_measure.push(measure);
            self.face_normal.push(normal);
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_faces(&self) -> usize {
        self.face_cells.len()
    }

    pub fn cell_nodes(&self, k: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[k * nv..(k + 1) * nv]
    }

    /// Global face indices of cell `k`, local face `i` opposite local
    /// vertex `i`.
    pub fn cell_faces(&self, k: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cell_faces[k * nv..(k + 1) * nv]
    }

    pub fn face_nodes(&self, f: usize) -> &[usize] {
        let d = self.dim;
        &self.face_nodes[f * d..(f + 1) * d]
    }

    /// Adjacent cells; the second is `None` on the boundary.
    pub fn face_cells(&self, f: usize) -> (usize, Option<usize>) {
        let [a, b] = self.face_cells[f];
        (a, (b != NONE).then_some(b))
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_cells[f][1] == NONE
    }

    pub fn face_measure(&self, f: usize) -> T {
        self.face_measure[f]
    }

    /// Unit normal of face `f`, pointing out of its first adjacent cell.
    pub fn face_normal(&self, f: usize) -> Vec2<T> {
        self.face_normal[f]
    }

    /// `+1` when the global normal of face `f` points out of cell `k`.
    pub fn face_sign(&self, k: usize, f: usize) -> T {
        if self.face_cells[f][0] == k {
            T::one()
        } else {
            -T::one()
        }
    }

    pub fn face_centroid(&self, f: usize) -> Vec2<T> {
        let nodes = self.face_nodes(f);
        let mut c = Vec2::zero();
        for &n in nodes {
            c += self.nodes[n];
        }
        c / T::from_usize_lossy(nodes.len())
    }

    pub fn tags(&self) -> &[FaceTag] {
        &self.tags
    }

    pub fn tag(&self, f: usize) -> FaceTag {
        self.tags[f]
    }

    pub fn set_tag(&mut self, f: usize, tag: FaceTag) {
        self.tags[f] = tag;
    }

    pub fn total_measure(&self) -> T {
        self.cell_measure.iter().copied().sum()
    }

    /// Cells sharing each node.
    pub fn node_cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for k in 0..self.n_cells() {
            for &n in self.cell_nodes(k) {
                out[n].push(k);
            }
        }
        out
    }

    /// Nodes on boundary faces.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut b = vec![false; self.nodes.len()];
        for f in 0..self.n_faces() {
            if self.is_boundary_face(f) {
                for &n in self.face_nodes(f) {
                    b[n] = true;
                }
            }
        }
        b
    }

    /// Copy with new node coordinates and a fresh identity.
    pub fn with_nodes(&self, nodes: Vec<Vec2<T>>) -> Self {
        let mut g = self.clone();
        g.nodes = nodes;
        g.id = fresh_grid_id();
        g.compute_geometry();
        g
    }

    /// Copy with a fresh identity (distinct grid with equal geometry).
    pub fn duplicate(&self) -> Self {
        let mut g = self.clone();
        g.id = fresh_grid_id();
        g
    }

    /// Worst aspect ratio `h_K / ρ_K` with `ρ_K` the inradius; 1 for
    /// segment grids.
    pub fn shape_regularity(&self) -> T {
        shape_regularity(self)
    }

    pub fn mean_cell_diameter(&self) -> T {
        mean_cell_diameter(self)
    }
}

impl<T: Real> CellMesh<T> for SimplicialGrid<T> {
    fn grid_id(&self) -> u64 {
        self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    fn cell_vertices(&self, k: usize) -> [Vec2<T>; 3] {
        let mut v = [Vec2::zero(); 3];
        for (i, &n) in self.cell_nodes(k).iter().enumerate() {
            v[i] = self.nodes[n];
        }
        v
    }

    fn cell_measure(&self, k: usize) -> T {
        self.cell_measure[k]
    }
}

pub fn shape_regularity<T: Real>(grid: &SimplicialGrid<T>) -> T {
    if grid.dim < 2 {
        return T::one();
    }
    (0..grid.n_cells())
        .map(|k| {
            let v = grid.cell_vertices(k);
            let perimeter = v[0].dist(v[1]) + v[1].dist(v[2]) + v[2].dist(v[0]);
            let inradius = T::lit(2.0) * grid.cell_measure(k) / perimeter;
            grid.cell_diameter(k) / inradius
        })
        .fold(T::zero(), T::max)
}

pub fn mean_cell_diameter<T: Real>(grid: &SimplicialGrid<T>) -> T {
    let n = grid.n_cells();
    (0..n).map(|k| grid.cell_diameter(k)).sum::<T>() / T::from_usize_lossy(n)
}

/// Shifts every node not lying on a boundary face by `magnitude *
/// direction`; the result has a fresh identity.
pub fn perturb_internal_nodes<T: Real>(
    grid: &SimplicialGrid<T>,
    magnitude: T,
    direction: Vec2<T>,
) -> Result<SimplicialGrid<T>> {
    if grid.dim == 0 {
        return Ok(grid.duplicate());
    }
    let fixed = grid.boundary_nodes();
    let shift = direction * magnitude;
    let nodes: Vec<Vec2<T>> = grid
        .nodes
        .iter()
        .zip(&fixed)
        .map(|(&p, &f)| if f { p } else { p + shift })
        .collect();
    let out = grid.with_nodes(nodes);
    for k in 0..out.n_cells() {
        let measure = match out.dim {
            1 => {
                let c = grid.cell_nodes(k);
                let before = grid.nodes[c[1]] - grid.nodes[c[0]];
                let after = out.nodes[c[1]] - out.nodes[c[0]];
                after.dot(before) / before.norm()
            }
            _ => out.cell_measure(k),
        };
        if !(measure > T::zero()) {
            return Err(Error::InvalidPerturbation {
                cell: k,
                measure: measure.to_f64_lossy(),
            });
        }
    }
    Ok(out)
}

/// Extracts the faces of `grid` lying on `geom` as a grid one dimension
/// lower. With two-sided cuts the optional `side` selects the faces whose
/// adjacent cell lies on that side of the segment. Returns the grid and
/// the host face of every extracted cell.
pub fn extract_internal_boundary_grid<T: Real>(
    grid: &SimplicialGrid<T>,
    geom: &Geometry<T>,
    side: Option<Side>,
    tol: T,
) -> Result<(SimplicialGrid<T>, Vec<usize>)> {
    let faces: Vec<usize> = (0..grid.n_faces())
        .filter(|&f| {
            grid.face_nodes(f)
                .iter()
                .all(|&n| geom.distance_to_point(grid.nodes[n]) <= tol)
        })
        .filter(|&f| match (side, geom) {
            (Some(s), Geometry::Segment(seg)) => {
                let (a, b) = grid.face_cells(f);
                std::iter::once(a)
                    .chain(b)
                    .any(|c| seg.side_of(grid.cell_centroid(c)) == s)
            }
            _ => true,
        })
        .collect();
    if faces.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    faces_to_grid(grid, &faces, geom)
}

/// Faces tagged `Internal(j)`.
pub fn internal_faces<T: Real>(grid: &SimplicialGrid<T>, j: usize) -> Vec<usize> {
    (0..grid.n_faces())
        .filter(|&f| grid.tag(f) == FaceTag::Internal(j))
        .collect()
}

pub(crate) fn faces_to_grid<T: Real>(
    grid: &SimplicialGrid<T>,
    faces: &[usize],
    geom: &Geometry<T>,
) -> Result<(SimplicialGrid<T>, Vec<usize>)> {
    if grid.dim == 1 {
        if faces.len() != 1 {
            return Err(Error::MeshGeneration("point boundary must consist of exactly one face".into()));
        }
        let n = grid.face_nodes(faces[0])[0];
        return Ok((SimplicialGrid::point(grid.nodes[n]), faces.to_vec()));
    }
    let seg = geom
        .as_segment()
        .ok_or_else(|| Error::MeshGeneration("internal boundary of a 2D grid must be a segment".into()))?;
    let mut order: Vec<usize> = faces.to_vec();
    let key = |f: usize| seg.param(grid.face_centroid(f));
    order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap());
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut cells = Vec::with_capacity(order.len());
    for &f in &order {
        let mut fnodes = [grid.face_nodes(f)[0], grid.face_nodes(f)[1]];
        if seg.param(grid.nodes[fnodes[0]]) > seg.param(grid.nodes[fnodes[1]]) {
            fnodes.swap(0, 1);
        }
        let c: Vec<usize> = fnodes
            .iter()
            .map(|&n| {
                *local.entry(n).or_insert_with(|| {
                    nodes.push(grid.nodes[n]);
                    nodes.len() - 1
                })
            })
            .collect();
        cells.push(c);
    }
    Ok((SimplicialGrid::new(1, nodes, cells)?, order))
}

/// Arc-length index of a 1D grid along a reference segment, used to locate
/// cells by position.
#[derive(Debug, Clone)]
pub struct ChainIndex<T> {
    pub segment: Segment<T>,
    /// `(start, end, cell)` sorted by start.
    spans: Vec<(T, T, usize)>,
}

impl<T: Real> ChainIndex<T> {
    pub fn new(grid: &SimplicialGrid<T>, segment: Segment<T>) -> Self {
        let mut spans: Vec<(T, T, usize)> = (0..grid.n_cells())
            .map(|k| {
                let v = grid.cell_vertices(k);
                let (s0, s1) = (segment.param(v[0]), segment.param(v[1]));
                (s0.min(s1), s0.max(s1), k)
            })
            .collect();
        spans.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.2.cmp(&b.2)));
        Self { segment, spans }
    }

    pub fn spans(&self) -> &[(T, T, usize)] {
        &self.spans
    }

    pub fn start(&self) -> T {
        self.spans.first().map_or(T::zero(), |s| s.0)
    }

    pub fn end(&self) -> T {
        self.spans.iter().map(|s| s.1).fold(T::neg_infinity(), T::max)
    }

    /// Cell whose closed span contains `s` (within `tol`), lowest cell
    /// index on ties.
    pub fn locate(&self, s: T, tol: T) -> Option<usize> {
        let upto = self.spans.partition_point(|sp| sp.0 <= s + tol);
        let mut best: Option<usize> = None;
        for sp in self.spans[..upto].iter().rev() {
            if sp.1 + tol >= s {
                best = Some(best.map_or(sp.2, |b: usize| b.min(sp.2)));
            } else if best.is_some() {
                break;
            }
        }
        best
    }

    /// Sorted, deduplicated breakpoints.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut b: Vec<T> = self.spans.iter().flat_map(|s| [s.0, s.1]).collect();
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        b
    }
}

/// Merges sorted breakpoint lists, collapsing values closer than `tol`.
pub fn merge_breakpoints<T: Real>(lists: &[Vec<T>], tol: T) -> Vec<T> {
    let mut all: Vec<T> = lists.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = Vec::with_capacity(all.len());
    for s in all {
        if out.last().is_none_or(|&l| s - l > tol) {
            out.push(s);
        }
    }
    out
}

/// Grids attached to every subdomain and interface of a domain.
#[derive(Debug, Clone)]
pub struct GridBundle<T> {
    pub subdomain_grids: Vec<SimplicialGrid<T>>,
    pub interface_grids: Vec<SimplicialGrid<T>>,
    /// Grid of the faces of the higher-dimensional neighbour on `∂_jΩ_hi`.
    pub internal_boundary_grids: Vec<SimplicialGrid<T>>,
    /// Host face (in the higher-dimensional grid) of every internal
    /// boundary cell.
    pub internal_boundary_faces: Vec<Vec<usize>>,
}

impl<T: Real> GridBundle<T> {
    /// Total cell count over subdomain grids.
    pub fn n_subdomain_cells(&self) -> usize {
        self.subdomain_grids.iter().map(|g| g.n_cells()).sum()
    }
}
