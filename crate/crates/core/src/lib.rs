//! Mixed-dimensional Darcy flow on non-matching grids: lowest-order mixed
//! discretisation, transfer grids, mortar projections and guaranteed a
//! posteriori error majorants.

pub mod error;
pub mod estimate;
pub mod geometry;
pub mod linalg;
pub mod mdgeom;
pub mod mdgrid;
pub mod mdsolve;
pub mod pipeline;
pub mod project;
pub mod quadrature;
pub mod recon;
pub mod report;
pub mod scenarios;
pub mod scalar;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases of the generic types.
pub type Domain = mdgeom::MdDomain<f64>;
pub type DomainSpec = mdgeom::DomainSpec<f64>;
pub type Grid = mdgrid::SimplicialGrid<f64>;
pub type Bundle = mdgrid::GridBundle<f64>;
pub type Transfer = transfer::TransferGrid<f64>;
pub type Field = project::PolyField<f64>;
pub type Projections = project::ProjectionCache<f64>;
pub type Solution = mdsolve::MixedSolution<f64>;
pub type Potential = recon::ConformingPotential<f64>;
pub type Report = estimate::EstimateReport<f64>;
pub type Run = pipeline::RunResult<f64>;
