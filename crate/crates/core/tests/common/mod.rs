#![allow(dead_code)]

use mdest::geometry::{Segment, Vec2};
use mdest::mdgrid::{CellMesh, SimplicialGrid};
use mdest::project::{child_masses, mass_constrained_project, prolong, scott_zhang, PolyField};
use mdest::transfer::{build_transfer, Parent, TransferGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_segment(rng: &mut Rng8) -> Segment<f64> {
    let a = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let len = rng.gen_range(0.1..3.0);
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Segment::new(a, a + Vec2::new(t.cos(), t.sin()) * len)
}

/// Random partition of `seg` into `n` cells no shorter than a tenth of the
/// uniform spacing.
pub fn random_chain(rng: &mut Rng8, seg: &Segment<f64>, n: usize) -> SimplicialGrid<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let len = seg.length();
    let mut params = vec![0.0];
    let mut acc = 0.0;
    for wi in &w[..n - 1] {
        acc += wi / total * len;
        params.push(acc);
    }
    params.push(len);
    SimplicialGrid::chain(seg, &params).unwrap()
}

/// Jittered `nx × ny` triangulation of the unit square with random
/// diagonals; boundary nodes slide along their edges.
pub fn random_triangulation(rng: &mut Rng8, nx: usize, ny: usize) -> SimplicialGrid<f64> {
    let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let mut x = i as f64 * hx;
            let mut y = j as f64 * hy;
            if i > 0 && i < nx {
                x += rng.gen_range(-0.3..0.3) * hx;
            }
            if j > 0 && j < ny {
                y += rng.gen_range(-0.3..0.3) * hy;
            }
            nodes.push(Vec2::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, d]);
                cells.push(vec![b, c, d]);
            }
        }
    }
    SimplicialGrid::new(2, nodes, cells).unwrap()
}

/// Discontinuous P1 field with random vertex values in [-1, 1].
pub fn random_p1<M: CellMesh<f64> + ?Sized>(rng: &mut Rng8, mesh: &M) -> PolyField<f64> {
    let n = mesh.dim() + 1;
    let coeffs = (0..mesh.n_cells() * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PolyField::new(mesh, 1, coeffs, false).unwrap()
}

pub fn random_p0<M: CellMesh<f64> + ?Sized>(rng: &mut Rng8, mesh: &M) -> PolyField<f64> {
    PolyField::from_cell_values(mesh, (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Largest `|∫_K Πw − Σ_{t ⊂ K} ∫_t w|` over target cells, relative to the
/// largest cell mass, for the mass-constrained projection of `w` from `src`
/// to `dst` at the given degree.
pub fn mass_residual(src: &SimplicialGrid<f64>, dst: &SimplicialGrid<f64>, w: &PolyField<f64>, degree: usize) -> f64 {
    let tg = build_transfer(src, dst).unwrap();
    let p = prolong(w, src, &tg).unwrap();
    let out = mass_constrained_project(&p, &tg, dst, degree).unwrap();
    let masses = child_masses(&p, &tg, Parent::Dst, dst.n_cells());
    let scale = masses.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    (0..dst.n_cells())
        .map(|k| (out.integral(dst, k) - masses[k]).abs() / scale)
        .fold(0.0, f64::max)
}

/// Largest relative defect `|Σ_{t ⊂ c}|t| − |c|| / |c|` over the cells of
/// both parents.
pub fn partition_defect(tg: &TransferGrid<f64>, src: &SimplicialGrid<f64>, dst: &SimplicialGrid<f64>) -> f64 {
    let mut worst = 0.0f64;
    for (which, g) in [(Parent::Src, src), (Parent::Dst, dst)] {
        for c in 0..g.n_cells() {
            let s: f64 = tg.children(which, c).iter().map(|&t| tg.cell_measure(t)).sum();
            worst = worst.max((s - g.cell_measure(c)).abs() / g.cell_measure(c));
        }
    }
    worst
}

/// Every node of either parent coincides with a transfer node.
pub fn nodes_included(tg: &TransferGrid<f64>, src: &SimplicialGrid<f64>, dst: &SimplicialGrid<f64>, tol: f64) -> bool {
    src.nodes()
        .iter()
        .chain(dst.nodes())
        .all(|p| tg.nodes().iter().any(|q| q.dist(*p) <= tol))
}

/// Scott–Zhang applied to a continuous P1 field given on `other` must give
/// back its nodal values on `target`; returns the worst nodal error.
pub fn sz_reproduction_error(
    other: &SimplicialGrid<f64>,
    target: &SimplicialGrid<f64>,
    f: impl Fn(Vec2<f64>) -> f64,
) -> f64 {
    let tg = build_transfer(other, target).unwrap();
    let nodal: Vec<f64> = other.nodes().iter().map(|&x| f(x)).collect();
    let w = PolyField::from_nodal(other, &nodal);
    let p = prolong(&w, other, &tg).unwrap();
    let sz = scott_zhang(&p, &tg, target, None).unwrap();
    let scale = nodal.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for k in 0..target.n_cells() {
        for &z in target.cell_nodes(k) {
            let x = target.nodes()[z];
            worst = worst.max((sz.eval(target, k, x) - f(x)).abs() / scale);
        }
    }
    worst
}

/// Worst coefficient error of the six coupling operators on three copies of
/// one random segment grid, where each must act as the identity.
pub fn matching_identity_error(rng: &mut Rng8) -> f64 {
    use mdest::project::ProjectionCache;
    let seg = random_segment(rng);
    let n = rng.gen_range(1..12);
    let base = random_chain(rng, &seg, n);
    let (gi, gh, gl) = (base.duplicate(), base.duplicate(), base.duplicate());
    let cache = ProjectionCache::new(0, &gi, &gh, &gl).unwrap();
    let diff = |a: &PolyField<f64>, b: &PolyField<f64>| {
        assert_eq!(a.coeffs().len(), b.coeffs().len());
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let nodal = |rng: &mut Rng8, g: &SimplicialGrid<f64>| {
        let v: Vec<f64> = (0..g.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PolyField::from_nodal(g, &v)
    };
    let mut worst = 0.0f64;
    let tr = nodal(rng, &gh);
    worst = worst.max(diff(&cache.primal_to_interface_hi(&tr).unwrap(), &tr));
    let lo = nodal(rng, &gl);
    worst = worst.max(diff(&cache.primal_to_interface_lo(&lo).unwrap(), &lo));
    for degree in [0, 1] {
        let (a, b) = if degree == 0 { (random_p0(rng, &gh), random_p0(rng, &gl)) } else { (random_p1(rng, &gh), random_p1(rng, &gl)) };
        worst = worst.max(diff(&cache.dual_potential_to_interface_hi(&a).unwrap(), &a));
        worst = worst.max(diff(&cache.dual_potential_to_interface_lo(&b).unwrap(), &b));
        let m = if degree == 0 { random_p0(rng, &gi) } else { random_p1(rng, &gi) };
        worst = worst.max(diff(&cache.flux_to_internal_boundary(&m).unwrap(), &m));
        worst = worst.max(diff(&cache.flux_to_lower(&m).unwrap(), &m));
    }
    worst
}

/// Degree-0 mass-constrained projection against overlap averages computed
/// from interval intersections; returns the worst absolute difference.
/// Segments are axis-aligned so that node coordinates equal their arc-length
/// parameters and the oracle itself adds no rounding.
pub fn overlap_average_error(rng: &mut Rng8) -> f64 {
    let len = rng.gen_range(0.1..3.0);
    let c = rng.gen_range(-1.0..1.0);
    let seg = match rng.gen_range(0..4) {
        0 => Segment::new(Vec2::new(0.0, c), Vec2::new(len, c)),
        1 => Segment::new(Vec2::new(c, 0.0), Vec2::new(c, len)),
        2 => Segment::new(Vec2::new(0.0, c), Vec2::new(-len, c)),
        _ => Segment::new(Vec2::new(c, 0.0), Vec2::new(c, -len)),
    };
    let (ns, nd) = (rng.gen_range(1..15), rng.gen_range(1..15));
    let src = random_chain(rng, &seg, ns);
    let dst = random_chain(rng, &seg, nd);
    let vals: Vec<f64> = (0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w = PolyField::from_cell_values(&src, vals.clone()).unwrap();
    let tg = build_transfer(&src, &dst).unwrap();
    let out = mass_constrained_project(&prolong(&w, &src, &tg).unwrap(), &tg, &dst, 0).unwrap();
    let span = |g: &SimplicialGrid<f64>, k: usize| {
        let v = g.cell_nodes(k);
        let (a, b) = (seg.param(g.nodes()[v[0]]), seg.param(g.nodes()[v[1]]));
        (a.min(b), a.max(b))
    };
    let mut worst = 0.0f64;
    for k in 0..nd {
        let (a, b) = span(&dst, k);
        let mut acc = 0.0;
        for (c, v) in vals.iter().enumerate() {
            let (p, q) = span(&src, c);
            acc += v * (b.min(q) - a.max(p)).max(0.0);
        }
        worst = worst.max((out.coeffs()[k] - acc / (b - a)).abs());
    }
    worst
}

/// Two independent random triangulations of the unit square with at most
/// `max` divisions per direction.
pub fn random_pair_2d(rng: &mut Rng8, max: usize) -> (SimplicialGrid<f64>, SimplicialGrid<f64>) {
    let (ax, ay, bx, by) = (rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max));
    (random_triangulation(rng, ax, ay), random_triangulation(rng, bx, by))
}
