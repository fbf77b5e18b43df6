//! Property checks of the transfer grids and projection operators on
//! random grids, run by `--check-projections`.

use mdest::geometry::{Segment, Vec2};
use mdest::mdgrid::{CellMesh, SimplicialGrid};
use mdest::project::{child_masses, mass_constrained_project, prolong, scott_zhang, PolyField, ProjectionCache};
use mdest::transfer::{build_transfer, Parent, TransferGrid};
use mdest::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub cases: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tol
    }
}

fn segment(rng: &mut ChaCha8Rng) -> Segment<f64> {
    let a = Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Segment::new(a, a + Vec2::new(t.cos(), t.sin()) * rng.gen_range(0.2..1.5))
}

fn chain(rng: &mut ChaCha8Rng, seg: &Segment<f64>, n: usize) -> Result<SimplicialGrid<f64>> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let scale = seg.length() / w.iter().sum::<f64>();
    let mut params = vec![0.0];
    for wi in &w[..n - 1] {
        params.push(params.last().unwrap() + wi * scale);
    }
    params.push(seg.length());
    SimplicialGrid::chain(seg, &params)
}

/// Jittered triangulation of the unit square with random diagonals.
fn triangulation(rng: &mut ChaCha8Rng, n: usize) -> Result<SimplicialGrid<f64>> {
    let h = 1.0 / n as f64;
    let mut nodes = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let jitter = |rng: &mut ChaCha8Rng, k: usize| if k > 0 && k < n { rng.gen_range(-0.3..0.3) * h } else { 0.0 };
            let (dx, dy) = (jitter(rng, i), jitter(rng, j));
            nodes.push(Vec2::new(i as f64 * h + dx, j as f64 * h + dy));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                cells.extend([vec![a, b, c], vec![a, c, d]]);
            } else {
                cells.extend([vec![a, b, d], vec![b, c, d]]);
            }
        }
    }
    SimplicialGrid::new(2, nodes, cells)
}

fn pair(rng: &mut ChaCha8Rng, two_d: bool) -> Result<(SimplicialGrid<f64>, SimplicialGrid<f64>)> {
    if two_d {
        let (na, nb) = (rng.gen_range(1..6), rng.gen_range(1..6));
        Ok((triangulation(rng, na)?, triangulation(rng, nb)?))
    } else {
        let seg = segment(rng);
        let (na, nb) = (rng.gen_range(1..20), rng.gen_range(1..20));
        Ok((chain(rng, &seg, na)?, chain(rng, &seg, nb)?))
    }
}

fn random_field<M: CellMesh<f64>>(rng: &mut ChaCha8Rng, mesh: &M, degree: usize) -> Result<PolyField<f64>> {
    let n = if degree == 0 { 1 } else { mesh.dim() + 1 };
    PolyField::new(mesh, degree, (0..n * mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect(), false)
}

fn partition(tg: &TransferGrid<f64>, a: &SimplicialGrid<f64>, b: &SimplicialGrid<f64>) -> f64 {
    let mut worst = 0.0f64;
    for (which, g) in [(Parent::Src, a), (Parent::Dst, b)] {
        for c in 0..g.n_cells() {
            let s: f64 = tg.children(which, c).iter().map(|&t| tg.cell_measure(t)).sum();
            worst = worst.max((s / g.cell_measure(c) - 1.0).abs());
        }
    }
    worst
}

fn max_diff(a: &PolyField<f64>, b: &PolyField<f64>) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let (mut part, mut mass, mut cases) = (0.0f64, 0.0f64, 0);
    for two_d in [false, true] {
        for _ in 0..if two_d { 50 } else { 300 } {
            let (a, b) = pair(&mut rng, two_d)?;
            let tg = build_transfer(&a, &b)?;
            part = part.max(partition(&tg, &a, &b));
            let degree = rng.gen_range(0..2);
            let w = prolong(&random_field(&mut rng, &a, 1)?, &a, &tg)?;
            let out = mass_constrained_project(&w, &tg, &b, degree)?;
            let m = child_masses(&w, &tg, Parent::Dst, b.n_cells());
            let scale = m.iter().fold(f64::MIN_POSITIVE, |s, v| s.max(v.abs()));
            for (k, mk) in m.iter().enumerate() {
                mass = mass.max((out.integral(&b, k) - mk).abs() / scale);
            }
            cases += 1;
        }
    }
    checks.push(Check { name: "transfer cells partition both parents", worst: part, tol: 1e-12, cases });
    checks.push(Check { name: "constrained projection conserves cell mass", worst: mass, tol: 1e-12, cases });

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, b) = pair(&mut rng, false)?;
        let tg = build_transfer(&a, &b)?;
        let (c0, c1, c2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f = |x: Vec2<f64>| c0 + c1 * x.x + c2 * x.y;
        let w = PolyField::from_nodal(&a, &a.nodes().iter().map(|&x| f(x)).collect::<Vec<_>>());
        let sz = scott_zhang(&prolong(&w, &a, &tg)?, &tg, &b, None)?;
        for k in 0..b.n_cells() {
            for x in &b.cell_vertices(k)[..2] {
                worst = worst.max((sz.eval(&b, k, *x) - f(*x)).abs());
            }
        }
    }
    checks.push(Check { name: "Scott-Zhang reproduces affine functions", worst, tol: 1e-13, cases: 200 });

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let seg = segment(&mut rng);
        let n = rng.gen_range(1..12);
        let base = chain(&mut rng, &seg, n)?;
        let (gi, gh, gl) = (base.duplicate(), base.duplicate(), base.duplicate());
        let cache = ProjectionCache::new(0, &gi, &gh, &gl)?;
        let nodal = |rng: &mut ChaCha8Rng, g: &SimplicialGrid<f64>| {
            PolyField::from_nodal(g, &(0..g.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
        };
        let tr = nodal(&mut rng, &gh);
        worst = worst.max(max_diff(&cache.primal_to_interface_hi(&tr)?, &tr));
        let lo = nodal(&mut rng, &gl);
        worst = worst.max(max_diff(&cache.primal_to_interface_lo(&lo)?, &lo));
        for degree in [0, 1] {
            let a = random_field(&mut rng, &gh, degree)?;
            worst = worst.max(max_diff(&cache.dual_potential_to_interface_hi(&a)?, &a));
            let b = random_field(&mut rng, &gl, degree)?;
            worst = worst.max(max_diff(&cache.dual_potential_to_interface_lo(&b)?, &b));
            let m = random_field(&mut rng, &gi, degree)?;
            worst = worst.max(max_diff(&cache.flux_to_internal_boundary(&m)?, &m));
            worst = worst.max(max_diff(&cache.flux_to_lower(&m)?, &m));
        }
    }
    checks.push(Check { name: "all six operators are identities on matching grids", worst, tol: 1e-13, cases: 100 });
    Ok(checks)
}
