//! Transfer grids: common refinements of an interface grid and a coupled
//! grid, each cell tagged with its parent in both.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{clip_convex, dedup_ring, signed_area, Aabb, Segment, Vec2};
use crate::mdgrid::{fresh_grid_id, merge_breakpoints, CellMesh, ChainIndex, SimplicialGrid};
use crate::{Error, Real, Result};

/// Which parent grid of a transfer grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parent {
    /// The interface grid.
    Src,
    /// The coupled grid (internal boundary or lower-dimensional subdomain).
    Dst,
}

#[derive(Debug, Clone)]
pub struct TransferGrid<T> {
    id: u64,
    dim: usize,
    nodes: Vec<Vec2<T>>,
    cells: Vec<usize>,
    measure: Vec<T>,
    parents: [Vec<usize>; 2],
    children: [Vec<Vec<usize>>; 2],
    parent_ids: [u64; 2],
    /// Reference line of 1D transfer grids.
    axis: Option<Segment<T>>,
    tol: T,
}

fn slot(p: Parent) -> usize {
    match p {
        Parent::Src => 0,
        Parent::Dst => 1,
    }
}

impl<T: Real> TransferGrid<T> {
    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    pub fn cell_nodes(&self, k: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[k * nv..(k + 1) * nv]
    }

    pub fn parent(&self, which: Parent, k: usize) -> usize {
        self.parents[slot(which)][k]
    }

    /// `(src_cell, dst_cell)` of transfer cell `k`.
    pub fn parents_of(&self, k: usize) -> (usize, usize) {
        (self.parents[0][k], self.parents[1][k])
    }

    /// Transfer cells inside cell `c` of the given parent grid.
    pub fn children(&self, which: Parent, c: usize) -> &[usize] {
        &self.children[slot(which)][c]
    }

    pub fn parent_grid_id(&self, which: Parent) -> u64 {
        self.parent_ids[slot(which)]
    }

    /// Which parent a grid with identity `id` is, if any.
    pub fn role_of(&self, id: u64) -> Option<Parent> {
        if id == self.parent_ids[0] {
            Some(Parent::Src)
        } else if id == self.parent_ids[1] {
            Some(Parent::Dst)
        } else {
            None
        }
    }

    pub fn total_measure(&self) -> T {
        self.measure.iter().copied().sum()
    }

    /// Parent pair of the transfer cell containing `x` (lowest transfer
    /// cell index on ties).
    pub fn locate_parents(&self, x: Vec2<T>) -> Result<(usize, usize)> {
        let k = self.locate(x).ok_or(Error::OutOfDomain)?;
        Ok(self.parents_of(k))
    }

    pub fn locate(&self, x: Vec2<T>) -> Option<usize> {
        match self.dim {
            0 => (self.nodes[0].dist(x) <= self.tol).then_some(0),
            1 => {
                let axis = self.axis.unwrap();
                if axis.distance_to_point(x) > self.tol {
                    return None;
                }
                let s = axis.param(x);
                (0..self.n_cells()).find(|&k| {
                    let v = self.cell_vertices(k);
                    let (a, b) = (axis.param(v[0]), axis.param(v[1]));
                    a.min(b) - self.tol <= s && s <= a.max(b) + self.tol
                })
            }
            _ => {
                let eps = T::lit(1e-12);
                (0..self.n_cells()).find(|&k| self.barycentric(k, x).iter().all(|&l| l >= -eps))
            }
        }
    }

    pub fn to_json(&self) -> TransferJson {
        TransferJson {
            dim: self.dim,
            nodes: self.nodes.iter().map(|p| p.to_array()).collect(),
            cells: (0..self.n_cells()).map(|k| self.cell_nodes(k).to_vec()).collect(),
            measure: self.measure.iter().map(|m| m.to_f64_lossy()).collect(),
            src_parent: self.parents[0].clone(),
            dst_parent: self.parents[1].clone(),
        }
    }

    fn assemble(
        dim: usize,
        nodes: Vec<Vec2<T>>,
        cells: Vec<usize>,
        measure: Vec<T>,
        parents: [Vec<usize>; 2],
        counts: [usize; 2],
        parent_ids: [u64; 2],
        axis: Option<Segment<T>>,
        tol: T,
    ) -> Self {
        let mut children = [vec![Vec::new(); counts[0]], vec![Vec::new(); counts[1]]];
        for s in 0..2 {
            for (k, &p) in parents[s].iter().enumerate() {
                children[s][p].push(k);
            }
        }
        Self {
            id: fresh_grid_id(),
            dim,
            nodes,
            cells,
            measure,
            parents,
            children,
            parent_ids,
            axis,
            tol,
        }
    }
}

impl<T: Real> CellMesh<T> for TransferGrid<T> {
    fn grid_id(&self) -> u64 {
        self.id
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn n_cells(&self) -> usize {
        self.measure.len()
    }

    fn cell_vertices(&self, k: usize) -> [Vec2<T>; 3] {
        let mut v = [Vec2::zero(); 3];
        for (i, &n) in self.cell_nodes(k).iter().enumerate() {
            v[i] = self.nodes[n];
        }
        v
    }

    fn cell_measure(&self, k: usize) -> T {
        self.measure[k]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferJson {
    pub dim: usize,
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    pub measure: Vec<f64>,
    pub src_parent: Vec<usize>,
    pub dst_parent: Vec<usize>,
}

/// Transfer grid between grids of equal intrinsic dimension.
pub fn build_transfer<T: Real>(src: &SimplicialGrid<T>, dst: &SimplicialGrid<T>) -> Result<TransferGrid<T>> {
    if src.dim() != dst.dim() {
        return Err(Error::GridMismatch(format!(
            "transfer between grids of dimension {} and {}",
            src.dim(),
            dst.dim()
        )));
    }
    match src.dim() {
        0 => build_transfer_0d(src, dst),
        1 => build_transfer_1d(src, dst),
        _ => build_transfer_2d(src, dst),
    }
}

fn extent<T: Real>(g: &SimplicialGrid<T>) -> T {
    Aabb::from_points(g.nodes()).diameter()
}

pub fn build_transfer_0d<T: Real>(src: &SimplicialGrid<T>, dst: &SimplicialGrid<T>) -> Result<TransferGrid<T>> {
    let (p, q) = (src.nodes()[0], dst.nodes()[0]);
    let tol = T::lit(1e-10) * p.norm().max(T::one());
    if p.dist(q) > tol {
        return Err(Error::CoverageMismatch {
            mismatch: p.dist(q).to_f64_lossy(),
        });
    }
    Ok(TransferGrid::assemble(
        0,
        vec![p],
        vec![0],
        vec![T::one()],
        [vec![0], vec![0]],
        [1, 1],
        [src.id(), dst.id()],
        None,
        tol,
    ))
}

/// Common refinement of two segment grids covering the same segment:
/// cells are the intervals between consecutive breakpoints of either grid.
pub fn build_transfer_1d<T: Real>(src: &SimplicialGrid<T>, dst: &SimplicialGrid<T>) -> Result<TransferGrid<T>> {
    let sv = src.cell_vertices(0);
    let probe = Segment::new(sv[0], sv[1]);
    let params: Vec<T> = src.nodes().iter().map(|&p| probe.param(p)).collect();
    let (imin, imax) = argminmax(&params);
    let axis = Segment::new(src.nodes()[imin], src.nodes()[imax]);
    let len = axis.length();
    let tol = T::lit(1e-10) * len;

    let dparams: Vec<T> = dst.nodes().iter().map(|&p| axis.param(p)).collect();
    let off_line = dst
        .nodes()
        .iter()
        .map(|&p| {
            let s = axis.param(p);
            p.dist(axis.point_at(s))
        })
        .fold(T::zero(), T::max);
    let (dmin, dmax) = argminmax(&dparams);
    let mismatch = off_line.max(dparams[dmin].abs()).max((dparams[dmax] - len).abs());
    if mismatch > tol {
        return Err(Error::CoverageMismatch {
            mismatch: mismatch.to_f64_lossy(),
        });
    }

    let si = ChainIndex::new(src, axis);
    let di = ChainIndex::new(dst, axis);
    let mut bps = merge_breakpoints(&[si.breakpoints(), di.breakpoints()], tol);
    *bps.first_mut().unwrap() = T::zero();
    *bps.last_mut().unwrap() = len;

    // reuse parent node coordinates so that shared nodes are bitwise equal
    let mut known: Vec<(T, Vec2<T>)> = dst
        .nodes()
        .iter()
        .zip(&dparams)
        .map(|(&p, &s)| (s, p))
        .chain(src.nodes().iter().map(|&p| (axis.param(p), p)))
        .collect();
    known.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let nodes: Vec<Vec2<T>> = bps
        .iter()
        .map(|&s| {
            let i = known.partition_point(|e| e.0 < s);
            [i.wrapping_sub(1), i]
                .into_iter()
                .filter_map(|j| known.get(j))
                .filter(|e| (e.0 - s).abs() <= tol)
                .min_by(|a, b| (a.0 - s).abs().partial_cmp(&(b.0 - s).abs()).unwrap())
                .map_or_else(|| axis.point_at(s), |e| e.1)
        })
        .collect();
    let mut cells = Vec::new();
    let mut measure = Vec::new();
    let mut parents = [Vec::new(), Vec::new()];
    for k in 0..bps.len() - 1 {
        let (a, b) = (bps[k], bps[k + 1]);
        if b - a <= tol {
            continue;
        }
        let mid = (a + b) * T::lit(0.5);
        let (Some(ps), Some(pd)) = (si.locate(mid, T::zero()), di.locate(mid, T::zero())) else {
            return Err(Error::CoverageMismatch {
                mismatch: (b - a).to_f64_lossy(),
            });
        };
        cells.extend([k, k + 1]);
        measure.push(b - a);
        parents[0].push(ps);
        parents[1].push(pd);
    }
    Ok(TransferGrid::assemble(
        1,
        nodes,
        cells,
        measure,
        parents,
        [src.n_cells(), dst.n_cells()],
        [src.id(), dst.id()],
        Some(axis),
        tol,
    ))
}

fn argminmax<T: Real>(v: &[T]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (k, &x) in v.iter().enumerate() {
        if x < v[lo] {
            lo = k;
        }
        if x > v[hi] {
            hi = k;
        }
    }
    (lo, hi)
}

/// Bucket index of triangle bounding boxes for candidate-pair pruning.
struct Buckets<T> {
    origin: Vec2<T>,
    size: T,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl<T: Real> Buckets<T> {
    fn new(g: &SimplicialGrid<T>) -> Self {
        let bb = Aabb::from_points(g.nodes());
        let n = ((g.n_cells() as f64).sqrt().ceil() as usize).max(1);
        let span = (bb.max.x - bb.min.x).max(bb.max.y - bb.min.y).max(T::min_positive_value());
        let size = span / T::from_usize_lossy(n);
        let nx = (((bb.max.x - bb.min.x) / size).to_usize().unwrap_or(0) + 1).min(n + 1);
        let ny = (((bb.max.y - bb.min.y) / size).to_usize().unwrap_or(0) + 1).min(n + 1);
        let mut b = Self {
            origin: bb.min,
            size,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for k in 0..g.n_cells() {
            let v = g.cell_vertices(k);
            let (x0, x1, y0, y1) = b.range(&Aabb::from_points(&v));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    b.cells[y * nx + x].push(k);
                }
            }
        }
        b
    }

    fn clamp(&self, v: T, n: usize) -> usize {
        let i = (v / self.size).floor().to_isize().unwrap_or(0);
        i.clamp(0, n as isize - 1) as usize
    }

    fn range(&self, bb: &Aabb<T>) -> (usize, usize, usize, usize) {
        (
            self.clamp(bb.min.x - self.origin.x, self.nx),
            self.clamp(bb.max.x - self.origin.x, self.nx),
            self.clamp(bb.min.y - self.origin.y, self.ny),
            self.clamp(bb.max.y - self.origin.y, self.ny),
        )
    }
}

/// Common refinement of two triangulations of the same polygon by
/// pairwise convex clipping. Intersections with four or more vertices are
/// fanned from their vertex centroid.
pub fn build_transfer_2d<T: Real>(src: &SimplicialGrid<T>, dst: &SimplicialGrid<T>) -> Result<TransferGrid<T>> {
    let (asrc, adst) = (src.total_measure(), dst.total_measure());
    let rel = T::lit(1e-10);
    if (asrc - adst).abs() > rel * asrc.max(adst) {
        return Err(Error::CoverageMismatch {
            mismatch: (asrc - adst).abs().to_f64_lossy(),
        });
    }
    let diam = extent(src).max(extent(dst));
    let tol = T::lit(1e-12) * diam;
    let buckets = Buckets::new(dst);

    type Piece<T> = (Vec<[Vec2<T>; 3]>, usize, usize);
    let per_src: Vec<Result<Vec<Piece<T>>>> = (0..src.n_cells())
        .into_par_iter()
        .map(|ks| {
            let vs = src.cell_vertices(ks);
            let bs = Aabb::from_points(&vs);
            let (x0, x1, y0, y1) = buckets.range(&bs);
            let mut cand: Vec<usize> = Vec::new();
            for y in y0..=y1 {
                for x in x0..=x1 {
                    cand.extend_from_slice(&buckets.cells[y * buckets.nx + x]);
                }
            }
            cand.sort_unstable();
            cand.dedup();
            let mut out = Vec::new();
            for kd in cand {
                let vd = dst.cell_vertices(kd);
                if !bs.overlaps(&Aabb::from_points(&vd), tol) {
                    continue;
                }
                let eps_area = T::lit(1e-12) * src.cell_measure(ks).min(dst.cell_measure(kd));
                let poly = dedup_ring(&clip_convex(&vs, &vd), tol);
                let area = signed_area(&poly);
                if area <= eps_area {
                    continue;
                }
                if poly.len() < 3 {
                    return Err(Error::DegenerateClip { area: area.to_f64_lossy() });
                }
                let tris = if poly.len() == 3 {
                    vec![[poly[0], poly[1], poly[2]]]
                } else {
                    let mut c = Vec2::zero();
                    for p in &poly {
                        c += *p;
                    }
                    let c = c / T::from_usize_lossy(poly.len());
                    (0..poly.len())
                        .map(|i| [c, poly[i], poly[(i + 1) % poly.len()]])
                        .filter(|t| crate::geometry::triangle_signed_area(t[0], t[1], t[2]) > T::zero())
                        .collect()
                };
                out.push((tris, ks, kd));
            }
            Ok(out)
        })
        .collect();

    let mut pool = NodePool::new(tol);
    for p in src.nodes().iter().chain(dst.nodes()) {
        pool.insert(*p);
    }
    let mut cells = Vec::new();
    let mut measure = Vec::new();
    let mut parents = [Vec::new(), Vec::new()];
    for pieces in per_src {
        for (tris, ks, kd) in pieces? {
            for t in tris {
                let ids = t.map(|p| pool.insert(p));
                let a = crate::geometry::triangle_signed_area(pool.nodes[ids[0]], pool.nodes[ids[1]], pool.nodes[ids[2]]);
                let a = if a > T::zero() { a } else { crate::geometry::triangle_signed_area(t[0], t[1], t[2]) };
                cells.extend(ids);
                measure.push(a);
                parents[0].push(ks);
                parents[1].push(kd);
            }
        }
    }
    let total: T = measure.iter().copied().sum();
    if (total - asrc).abs() > rel * asrc {
        return Err(Error::CoverageMismatch {
            mismatch: (total - asrc).abs().to_f64_lossy(),
        });
    }
    Ok(TransferGrid::assemble(
        2,
        pool.nodes,
        cells,
        measure,
        parents,
        [src.n_cells(), dst.n_cells()],
        [src.id(), dst.id()],
        None,
        tol,
    ))
}

/// Point set with tolerance-based deduplication on a hash grid.
struct NodePool<T> {
    tol: T,
    nodes: Vec<Vec2<T>>,
    index: HashMap<(i64, i64), Vec<usize>>,
}

impl<T: Real> NodePool<T> {
    fn new(tol: T) -> Self {
        Self {
            tol: tol.max(T::min_positive_value()),
            nodes: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn key(&self, p: Vec2<T>) -> (i64, i64) {
        let q = self.tol * T::lit(4.0);
        (
            (p.x / q).floor().to_i64().unwrap_or(0),
            (p.y / q).floor().to_i64().unwrap_or(0),
        )
    }

    fn insert(&mut self, p: Vec2<T>) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.index.get(&(kx + dx, ky + dy)) {
                    for &i in list {
                        if self.nodes[i].dist(p) <= self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        self.nodes.push(p);
        let id = self.nodes.len() - 1;
        self.index.entry((kx, ky)).or_default().push(id);
        id
    }
}
