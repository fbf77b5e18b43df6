//! JSON domain description.
//!
//! ```json
//! {
//!   "subdomains": [
//!     {"id": 0, "dim": 2, "geometry": {"polygon": [[0,0],[1,0],[1,1],[0,1]]}},
//!     {"id": 1, "dim": 1, "geometry": {"segment": [[0.5,0],[0.5,1]]}}
//!   ],
//!   "interfaces": [
//!     {"id": 0, "hi": 0, "lo": 1, "side": "left", "normal_permeability": 1.0}
//!   ],
//!   "materials": [
//!     {"subdomain": 0, "permeability": [[1,0],[0,1]], "source": {"linear": [0,1,0]}}
//!   ],
//!   "boundary_conditions": [
//!     {"subdomain": 0, "kind": "dirichlet", "segment": [[0,0],[0,1]], "value": 1.0},
//!     {"subdomain": 1, "kind": "dirichlet", "point": [0.5,0], "value": 0.0}
//!   ]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    build_domain, tensor_from_matrix, BoundaryKind, DomainSpec, Geometry, MdDomain, PermeabilityField, ScalarField,
};
use crate::geometry::{Segment, Side, Vec2};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainJson {
    pub subdomains: Vec<SubdomainJson>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceJson>,
    #[serde(default)]
    pub materials: Vec<MaterialJson>,
    #[serde(default)]
    pub boundary_conditions: Vec<BoundaryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainJson {
    pub id: usize,
    pub dim: usize,
    pub geometry: GeometryJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryJson {
    Polygon(Vec<[f64; 2]>),
    Segment([[f64; 2]; 2]),
    Point([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceJson {
    pub id: usize,
    pub hi: usize,
    pub lo: usize,
    #[serde(default)]
    pub side: Option<Side>,
    pub normal_permeability: f64,
    #[serde(default)]
    pub geometry: Option<GeometryJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermeabilityJson {
    Scalar(f64),
    Matrix([[f64; 2]; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Constant(f64),
    Linear { linear: [f64; 3] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialJson {
    pub subdomain: usize,
    #[serde(default)]
    pub permeability: Option<PermeabilityJson>,
    #[serde(default)]
    pub source: Option<ValueJson>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindJson {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryJson {
    pub subdomain: usize,
    pub kind: KindJson,
    #[serde(default)]
    pub segment: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub point: Option<[f64; 2]>,
    #[serde(default)]
    pub value: Option<ValueJson>,
}

impl GeometryJson {
    fn to_geometry<T: Real>(&self) -> Geometry<T> {
        match self {
            GeometryJson::Polygon(p) => Geometry::Polygon(p.iter().map(|&a| Vec2::from_array(a)).collect()),
            GeometryJson::Segment([a, b]) => Geometry::Segment(Segment::new(Vec2::from_array(*a), Vec2::from_array(*b))),
            GeometryJson::Point(p) => Geometry::Point(Vec2::from_array(*p)),
        }
    }
}

impl ValueJson {
    fn to_field<T: Real>(&self) -> ScalarField<T> {
        match self {
            ValueJson::Constant(c) => ScalarField::Constant(T::lit(*c)),
            ValueJson::Linear { linear } => ScalarField::Linear(linear.map(T::lit)),
        }
    }
}

impl DomainJson {
    pub fn to_spec<T: Real>(&self) -> Result<DomainSpec<T>> {
        let mut subs = self.subdomains.clone();
        subs.sort_by_key(|s| s.id);
        let mut spec = DomainSpec::new();
        for (k, s) in subs.iter().enumerate() {
            if s.id != k {
                return Err(Error::InvalidSpec(format!("subdomain ids must be contiguous from 0 (missing {k})")));
            }
            let id = spec.add_subdomain(s.geometry.to_geometry());
            spec.subdomains[id].dim = s.dim;
        }
        let n = spec.subdomains.len();
        let check = |i: usize, what: &str| {
            if i < n {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{what} references missing subdomain {i}")))
            }
        };
        for m in &self.materials {
            check(m.subdomain, "material")?;
            if let Some(k) = &m.permeability {
                let field = match k {
                    PermeabilityJson::Scalar(v) => PermeabilityField::scalar(T::lit(*v)),
                    PermeabilityJson::Matrix(a) => {
                        PermeabilityField::Constant(tensor_from_matrix(m.subdomain, a.map(|r| r.map(T::lit)))?)
                    }
                };
                spec.set_permeability(m.subdomain, field);
            }
            if let Some(f) = &m.source {
                spec.set_source(m.subdomain, f.to_field());
            }
        }
        for b in &self.boundary_conditions {
            check(b.subdomain, "boundary condition")?;
            let geometry = match (&b.segment, &b.point) {
                (Some([a, c]), None) => Geometry::Segment(Segment::new(Vec2::from_array(*a), Vec2::from_array(*c))),
                (None, Some(p)) => Geometry::Point(Vec2::from_array(*p)),
                _ => {
                    return Err(Error::InvalidSpec(
                        "boundary condition needs exactly one of \"segment\" or \"point\"".into(),
                    ))
                }
            };
            let kind = match b.kind {
                KindJson::Dirichlet => BoundaryKind::Dirichlet,
                KindJson::Neumann => BoundaryKind::Neumann,
            };
            let value = b.value.as_ref().map(|v| v.to_field()).unwrap_or_default();
            spec.add_boundary(b.subdomain, kind, geometry, value);
        }
        let mut itfs = self.interfaces.clone();
        itfs.sort_by_key(|j| j.id);
        for (k, j) in itfs.iter().enumerate() {
            if j.id != k {
                return Err(Error::InvalidSpec(format!("interface ids must be contiguous from 0 (missing {k})")));
            }
            check(j.hi, "interface")?;
            check(j.lo, "interface")?;
            let kappa = T::lit(j.normal_permeability);
            match &j.geometry {
                Some(g) => spec.add_interface_with_geometry(j.hi, j.lo, j.side, kappa, g.to_geometry()),
                None => spec.add_interface(j.hi, j.lo, j.side, kappa),
            };
        }
        Ok(spec)
    }
}

pub fn parse_domain<T: Real>(text: &str) -> Result<MdDomain<T>> {
    let raw: DomainJson = serde_json::from_str(text)?;
    build_domain(raw.to_spec()?)
}

pub fn read_domain<T: Real>(path: &Path) -> Result<MdDomain<T>> {
    parse_domain(&std::fs::read_to_string(path)?)
}
