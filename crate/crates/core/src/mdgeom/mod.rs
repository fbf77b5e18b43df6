//! Mixed-dimensional domain decomposition: subdomains, interfaces, coupling
//! triplets and boundary data.

pub mod json;

use std::fmt;
use std::sync::Arc;

use crate::geometry::{Aabb, Segment, Side, Vec2};
use crate::linalg::sym2_eigenvalues;
use crate::{Error, Real, Result};

/// Point-set descriptor of a flat subdomain or interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry<T> {
    /// Counter-clockwise convex polygon.
    Polygon(Vec<Vec2<T>>),
    Segment(Segment<T>),
    Point(Vec2<T>),
}

impl<T: Real> Geometry<T> {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Polygon(_) => 2,
            Geometry::Segment(_) => 1,
            Geometry::Point(_) => 0,
        }
    }

    pub fn vertices(&self) -> Vec<Vec2<T>> {
        match self {
            Geometry::Polygon(p) => p.clone(),
            Geometry::Segment(s) => vec![s.a, s.b],
            Geometry::Point(p) => vec![*p],
        }
    }

    /// Lebesgue measure in the intrinsic dimension (1 for a point).
    pub fn measure(&self) -> T {
        match self {
            Geometry::Polygon(p) => crate::geometry::signed_area(p).abs(),
            Geometry::Segment(s) => s.length(),
            Geometry::Point(_) => T::one(),
        }
    }

    pub fn centroid(&self) -> Vec2<T> {
        let v = self.vertices();
        let mut c = Vec2::zero();
        for p in &v {
            c += *p;
        }
        c / T::from_usize_lossy(v.len())
    }

    pub fn as_segment(&self) -> Option<Segment<T>> {
        match self {
            Geometry::Segment(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_point(&self) -> Option<Vec2<T>> {
        match self {
            Geometry::Point(p) => Some(*p),
            _ => None,
        }
    }

    /// Distance from `p` to the closed point set.
    pub fn distance_to_point(&self, p: Vec2<T>) -> T {
        match self {
            Geometry::Point(q) => q.dist(p),
            Geometry::Segment(s) => s.distance_to_point(p),
            Geometry::Polygon(poly) => {
                let n = poly.len();
                let inside = (0..n).all(|i| (poly[(i + 1) % n] - poly[i]).cross(p - poly[i]) >= T::zero());
                if inside {
                    return T::zero();
                }
                (0..n)
                    .map(|i| Segment::new(poly[i], poly[(i + 1) % n]).distance_to_point(p))
                    .fold(T::infinity(), T::min)
            }
        }
    }

    /// Hausdorff distance between two descriptors of dimension at most one.
    pub fn hausdorff(&self, o: &Geometry<T>) -> T {
        match (self, o) {
            (Geometry::Segment(a), Geometry::Segment(b)) => a.hausdorff(b),
            _ => {
                let d1 = self.vertices().iter().map(|p| o.distance_to_point(*p)).fold(T::zero(), T::max);
                let d2 = o.vertices().iter().map(|p| self.distance_to_point(*p)).fold(T::zero(), T::max);
                d1.max(d2)
            }
        }
    }
}

/// Symmetric 2x2 tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> SymTensor<T> {
    pub fn isotropic(k: T) -> Self {
        Self {
            xx: k,
            xy: T::zero(),
            yy: k,
        }
    }

    pub fn diag(a: T, b: T) -> Self {
        Self {
            xx: a,
            xy: T::zero(),
            yy: b,
        }
    }

    pub fn apply(&self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self {
            xx: self.yy / d,
            xy: -self.xy / d,
            yy: self.xx / d,
        }
    }

    /// (smallest, largest) eigenvalue.
    pub fn eigenvalues(&self) -> (T, T) {
        sym2_eigenvalues(self.xx, self.xy, self.yy)
    }

    /// Restriction `t · K t` to a unit direction.
    pub fn tangential(&self, t: Vec2<T>) -> T {
        t.dot(self.apply(t))
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            xx: self.xx * s,
            xy: self.xy * s,
            yy: self.yy * s,
        }
    }
}

type ScalarFn<T> = Arc<dyn Fn(Vec2<T>) -> T + Send + Sync>;
type TensorFn<T> = Arc<dyn Fn(Vec2<T>) -> SymTensor<T> + Send + Sync>;

/// Scalar data field: sources and boundary values.
#[derive(Clone)]
pub enum ScalarField<T> {
    Constant(T),
    /// `a + b x + c y`.
    Linear([T; 3]),
    Function(ScalarFn<T>),
}

impl<T: Real> ScalarField<T> {
    pub fn function(f: impl Fn(Vec2<T>) -> T + Send + Sync + 'static) -> Self {
        ScalarField::Function(Arc::new(f))
    }

    pub fn eval(&self, x: Vec2<T>) -> T {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Linear([a, b, c]) => *a + *b * x.x + *c * x.y,
            ScalarField::Function(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Constant(c) if *c == T::zero())
    }

    /// True when the field is a polynomial of degree at most one.
    pub fn is_affine(&self) -> bool {
        !matches!(self, ScalarField::Function(_))
    }
}

impl<T: Real> Default for ScalarField<T> {
    fn default() -> Self {
        ScalarField::Constant(T::zero())
    }
}

impl<T: fmt::Debug> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c:?})"),
            ScalarField::Linear(c) => write!(f, "Linear({c:?})"),
            ScalarField::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Permeability field; scalar values mean isotropic tensors. On 1D
/// subdomains only the tangential component is used.
#[derive(Clone)]
pub enum PermeabilityField<T> {
    Constant(SymTensor<T>),
    Function(TensorFn<T>),
}

impl<T: Real> PermeabilityField<T> {
    pub fn scalar(k: T) -> Self {
        PermeabilityField::Constant(SymTensor::isotropic(k))
    }

    pub fn function(f: impl Fn(Vec2<T>) -> SymTensor<T> + Send + Sync + 'static) -> Self {
        PermeabilityField::Function(Arc::new(f))
    }

    pub fn eval(&self, x: Vec2<T>) -> SymTensor<T> {
        match self {
            PermeabilityField::Constant(k) => *k,
            PermeabilityField::Function(f) => f(x),
        }
    }
}

impl<T: Real> Default for PermeabilityField<T> {
    fn default() -> Self {
        Self::scalar(T::one())
    }
}

impl<T: fmt::Debug> fmt::Debug for PermeabilityField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermeabilityField::Constant(k) => write!(f, "Constant({k:?})"),
            PermeabilityField::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Tagged piece of a subdomain boundary: a segment for 2D subdomains, a
/// point for 1D subdomains.
#[derive(Debug, Clone)]
pub struct BoundaryPiece<T> {
    pub kind: BoundaryKind,
    pub geometry: Geometry<T>,
    pub value: ScalarField<T>,
}

#[derive(Debug, Clone)]
pub struct Subdomain<T> {
    pub id: usize,
    pub dim: usize,
    pub geometry: Geometry<T>,
    pub permeability: PermeabilityField<T>,
    pub source: ScalarField<T>,
    pub dirichlet: Vec<BoundaryPiece<T>>,
    pub neumann: Vec<BoundaryPiece<T>>,
}

impl<T: Real> Subdomain<T> {
    /// Dirichlet piece containing `x`, if any.
    pub fn dirichlet_at(&self, x: Vec2<T>, tol: T) -> Option<&BoundaryPiece<T>> {
        self.dirichlet.iter().find(|p| p.geometry.distance_to_point(x) <= tol)
    }

    pub fn neumann_at(&self, x: Vec2<T>, tol: T) -> Option<&BoundaryPiece<T>> {
        self.neumann.iter().find(|p| p.geometry.distance_to_point(x) <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct Interface<T> {
    pub id: usize,
    pub dim: usize,
    /// Higher-dimensional neighbour.
    pub hi: usize,
    /// Lower-dimensional neighbour.
    pub lo: usize,
    /// Side of the interface segment on which the higher-dimensional
    /// neighbour lies (1D interfaces only).
    pub side: Option<Side>,
    pub geometry: Geometry<T>,
    pub normal_permeability: T,
}

/// The three coinciding descriptors `(∂_jΩ_hi, Γ_j, Ω_lo)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTriplet<T> {
    pub internal_boundary: Geometry<T>,
    pub interface: Geometry<T>,
    pub lower: Geometry<T>,
}

/// Unvalidated domain description.
#[derive(Debug, Clone, Default)]
pub struct DomainSpec<T> {
    pub subdomains: Vec<Subdomain<T>>,
    pub interfaces: Vec<Interface<T>>,
}

impl<T: Real> DomainSpec<T> {
    pub fn new() -> Self {
        Self {
            subdomains: Vec::new(),
            interfaces: Vec::new(),
        }
    }

    /// Adds a subdomain with unit permeability and zero source.
    pub fn add_subdomain(&mut self, geometry: Geometry<T>) -> usize {
        let id = self.subdomains.len();
        self.subdomains.push(Subdomain {
            id,
            dim: geometry.dim(),
            geometry,
            permeability: PermeabilityField::default(),
            source: ScalarField::default(),
            dirichlet: Vec::new(),
            neumann: Vec::new(),
        });
        id
    }

    pub fn set_permeability(&mut self, i: usize, k: PermeabilityField<T>) -> &mut Self {
        self.subdomains[i].permeability = k;
        self
    }

    pub fn set_source(&mut self, i: usize, f: ScalarField<T>) -> &mut Self {
        self.subdomains[i].source = f;
        self
    }

    pub fn add_boundary(&mut self, i: usize, kind: BoundaryKind, geometry: Geometry<T>, value: ScalarField<T>) -> &mut Self {
        let piece = BoundaryPiece { kind, geometry, value };
        match kind {
            BoundaryKind::Dirichlet => self.subdomains[i].dirichlet.push(piece),
            BoundaryKind::Neumann => self.subdomains[i].neumann.push(piece),
        }
        self
    }

    pub fn add_dirichlet(&mut self, i: usize, geometry: Geometry<T>, value: ScalarField<T>) -> &mut Self {
        self.add_boundary(i, BoundaryKind::Dirichlet, geometry, value)
    }

    /// Adds an interface whose geometry is that of the lower-dimensional
    /// neighbour.
    pub fn add_interface(&mut self, hi: usize, lo: usize, side: Option<Side>, kappa: T) -> usize {
        let geometry = self
            .subdomains
            .get(lo)
            .map(|s| s.geometry.clone())
            .unwrap_or(Geometry::Point(Vec2::zero()));
        self.add_interface_with_geometry(hi, lo, side, kappa, geometry)
    }

    pub fn add_interface_with_geometry(
        &mut self,
        hi: usize,
        lo: usize,
        side: Option<Side>,
        kappa: T,
        geometry: Geometry<T>,
    ) -> usize {
        let id = self.interfaces.len();
        self.interfaces.push(Interface {
            id,
            dim: geometry.dim(),
            hi,
            lo,
            side,
            geometry,
            normal_permeability: kappa,
        });
        id
    }
}

/// Validated mixed-dimensional domain.
#[derive(Debug, Clone)]
pub struct MdDomain<T> {
    pub subdomains: Vec<Subdomain<T>>,
    pub interfaces: Vec<Interface<T>>,
    hat_s: Vec<Vec<usize>>,
    check_s: Vec<Vec<usize>>,
    diameter: T,
}

/// Validates a domain description and builds the interface index sets.
pub fn build_domain<T: Real>(spec: DomainSpec<T>) -> Result<MdDomain<T>> {
    let dom = MdDomain::build_unchecked(spec)?;
    if dom.subdomains.iter().all(|s| s.dirichlet.is_empty()) {
        return Err(Error::MissingDirichlet);
    }
    Ok(dom)
}

impl<T: Real> MdDomain<T> {
    /// Like [`build_domain`] but accepts domains without Dirichlet data;
    /// such problems are singular and only useful to exercise solver
    /// diagnostics.
    pub fn build_unchecked(spec: DomainSpec<T>) -> Result<Self> {
        let DomainSpec { subdomains, interfaces } = spec;
        if subdomains.is_empty() {
            return Err(Error::InvalidSpec("no subdomains".into()));
        }
        for (k, s) in subdomains.iter().enumerate() {
            if s.id != k {
                return Err(Error::InvalidSpec(format!("subdomain ids must be 0..n in order, found {} at {k}", s.id)));
            }
            if s.dim > 2 || s.geometry.dim() != s.dim {
                return Err(Error::InvalidSpec(format!(
                    "subdomain {k}: dimension {} does not match its geometry",
                    s.dim
                )));
            }
            if let Geometry::Polygon(p) = &s.geometry {
                if p.len() < 3 || crate::geometry::signed_area(p) <= T::zero() {
                    return Err(Error::InvalidSpec(format!(
                        "subdomain {k}: polygon must be counter-clockwise with positive area"
                    )));
                }
            }
            if s.geometry.measure() <= T::zero() {
                return Err(Error::InvalidSpec(format!("subdomain {k}: degenerate geometry")));
            }
            for piece in s.dirichlet.iter().chain(&s.neumann) {
                if s.dim == 0 || piece.geometry.dim() + 1 != s.dim {
                    return Err(Error::InvalidSpec(format!(
                        "subdomain {k}: boundary piece of dimension {} on a {}D subdomain",
                        piece.geometry.dim(),
                        s.dim
                    )));
                }
                if matches!(piece.kind, BoundaryKind::Neumann) && !piece.value.is_zero() {
                    return Err(Error::InvalidSpec(format!(
                        "subdomain {k}: only homogeneous Neumann data is supported"
                    )));
                }
            }
            check_permeability(s)?;
        }

        let n = subdomains.len();
        let mut hat_s = vec![Vec::new(); n];
        let mut check_s = vec![Vec::new(); n];
        for (k, itf) in interfaces.iter().enumerate() {
            if itf.id != k {
                return Err(Error::InvalidSpec(format!("interface ids must be 0..m in order, found {} at {k}", itf.id)));
            }
            if itf.hi >= n || itf.lo >= n {
                return Err(Error::InvalidSpec(format!("interface {k} references a missing subdomain")));
            }
            let (dh, dl) = (subdomains[itf.hi].dim, subdomains[itf.lo].dim);
            if dh != dl + 1 {
                return Err(Error::CouplingDimension {
                    interface: k,
                    hi_dim: dh,
                    lo_dim: dl,
                });
            }
            if itf.dim != dl || itf.geometry.dim() != dl {
                return Err(Error::InvalidSpec(format!("interface {k}: dimension must equal that of its lower neighbour")));
            }
            if dl == 1 && itf.side.is_none() {
                return Err(Error::InvalidSpec(format!("interface {k}: one-dimensional interfaces need a side")));
            }
            let kappa = itf.normal_permeability;
            if !(kappa > T::zero() && kappa.is_finite()) {
                return Err(Error::InvalidSpec(format!("interface {k}: normal permeability must be positive and finite")));
            }
            hat_s[itf.lo].push(k);
            check_s[itf.hi].push(k);
        }

        let mut bb = Aabb::from_points(&subdomains[0].geometry.vertices());
        for s in &subdomains[1..] {
            bb = bb.union(&Aabb::from_points(&s.geometry.vertices()));
        }
        let diameter = bb.diameter().max(T::min_positive_value());
        let dom = Self {
            subdomains,
            interfaces,
            hat_s,
            check_s,
            diameter,
        };
        for j in 0..dom.interfaces.len() {
            dom.coupling_triplet(j)?;
        }
        Ok(dom)
    }

    pub fn subdomain(&self, i: usize) -> &Subdomain<T> {
        &self.subdomains[i]
    }

    pub fn interface(&self, j: usize) -> &Interface<T> {
        &self.interfaces[j]
    }

    pub fn n_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn n_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    /// Interfaces on the higher-dimensional side of subdomain `i`.
    pub fn hat_s(&self, i: usize) -> &[usize] {
        &self.hat_s[i]
    }

    /// Interfaces on the lower-dimensional side of subdomain `i`.
    pub fn check_s(&self, i: usize) -> &[usize] {
        &self.check_s[i]
    }

    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// Tolerance for point-set coincidence.
    pub fn eps_geom(&self) -> T {
        T::lit(1e-10) * self.diameter
    }

    pub fn has_dirichlet(&self) -> bool {
        self.subdomains.iter().any(|s| !s.dirichlet.is_empty())
    }

    /// Largest intrinsic dimension present.
    pub fn max_dim(&self) -> usize {
        self.subdomains.iter().map(|s| s.dim).max().unwrap_or(0)
    }

    pub fn coupling_triplet(&self, j: usize) -> Result<CouplingTriplet<T>> {
        let itf = &self.interfaces[j];
        let hi = &self.subdomains[itf.hi];
        let lo = &self.subdomains[itf.lo];
        let tol = self.eps_geom();
        let mismatch = |distance: T| Error::GeometryMismatch {
            interface: j,
            distance: distance.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        };
        let internal_boundary = match (&hi.geometry, &itf.geometry) {
            (Geometry::Polygon(_), Geometry::Segment(s)) => {
                let d = hi.geometry.distance_to_point(s.a).max(hi.geometry.distance_to_point(s.b));
                if d > tol {
                    return Err(mismatch(d));
                }
                Geometry::Segment(*s)
            }
            (Geometry::Segment(s), Geometry::Point(p)) => {
                let end = if s.a.dist(*p) <= s.b.dist(*p) { s.a } else { s.b };
                Geometry::Point(end)
            }
            _ => return Err(Error::InvalidSpec(format!("interface {j}: unsupported geometry pairing"))),
        };
        let d = internal_boundary
            .hausdorff(&itf.geometry)
            .max(itf.geometry.hausdorff(&lo.geometry));
        if d > tol {
            return Err(mismatch(d));
        }
        Ok(CouplingTriplet {
            internal_boundary,
            interface: itf.geometry.clone(),
            lower: lo.geometry.clone(),
        })
    }
}

/// Checks symmetry and uniform positivity of a permeability, sampling
/// function-valued fields at the geometry vertices and centroid.
fn check_permeability<T: Real>(s: &Subdomain<T>) -> Result<()> {
    if s.dim == 0 {
        return Ok(());
    }
    let mut samples = s.geometry.vertices();
    samples.push(s.geometry.centroid());
    let t = s.geometry.as_segment().map(|seg| seg.tangent());
    for x in samples {
        check_tensor(s.id, &s.permeability.eval(x), t)?;
    }
    Ok(())
}

pub(crate) fn check_tensor<T: Real>(subdomain: usize, k: &SymTensor<T>, tangent: Option<Vec2<T>>) -> Result<()> {
    let bad = |reason: String| Error::NonSpd { subdomain, reason };
    if !(k.xx.is_finite() && k.xy.is_finite() && k.yy.is_finite()) {
        return Err(bad("non-finite entry".into()));
    }
    let lmin = match tangent {
        Some(t) => k.tangential(t),
        None => k.eigenvalues().0,
    };
    if lmin <= T::zero() {
        return Err(bad(format!("smallest eigenvalue {lmin:e}")));
    }
    Ok(())
}

/// Builds a symmetric tensor from a full 2x2 matrix, rejecting asymmetric
/// input.
pub fn tensor_from_matrix<T: Real>(subdomain: usize, m: [[T; 2]; 2]) -> Result<SymTensor<T>> {
    let scale = m[0][0].abs().max(m[1][1].abs()).max(T::min_positive_value());
    if (m[0][1] - m[1][0]).abs() > T::lit(1e-12) * scale {
        return Err(Error::NonSpd {
            subdomain,
            reason: "matrix is not symmetric".into(),
        });
    }
    let k = SymTensor {
        xx: m[0][0],
        xy: m[0][1],
        yy: m[1][1],
    };
    check_tensor(subdomain, &k, None)?;
    Ok(k)
}

/// Axis-aligned rectangle as a counter-clockwise polygon.
pub fn rectangle<T: Real>(x0: T, y0: T, x1: T, y1: T) -> Geometry<T> {
    Geometry::Polygon(vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ])
}

pub fn segment<T: Real>(a: (f64, f64), b: (f64, f64)) -> Geometry<T> {
    Geometry::Segment(Segment::new(Vec2::new(T::lit(a.0), T::lit(a.1)), Vec2::new(T::lit(b.0), T::lit(b.1))))
}

pub fn point<T: Real>(p: (f64, f64)) -> Geometry<T> {
    Geometry::Point(Vec2::new(T::lit(p.0), T::lit(p.1)))
}
