use thiserror::Error;

/// Errors raised across the crate. Messages carry the module that raised
/// them so CLI diagnostics can be traced back to a pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mdgeom: invalid domain description: {0}")]
    InvalidSpec(String),
    #[error("mdgeom: interface {interface} couples subdomains of dimension {hi_dim} and {lo_dim}")]
    CouplingDimension {
        interface: usize,
        hi_dim: usize,
        lo_dim: usize,
    },
    #[error("mdgeom: no subdomain carries a Dirichlet boundary")]
    MissingDirichlet,
    #[error("mdgeom: permeability of subdomain {subdomain} is not symmetric positive definite: {reason}")]
    NonSpd { subdomain: usize, reason: String },
    #[error("mdgeom: coupling triplet of interface {interface} mismatched by {distance:e} (tolerance {tolerance:e})")]
    GeometryMismatch {
        interface: usize,
        distance: f64,
        tolerance: f64,
    },

    #[error("mdgrid: no face of the host grid lies on the interface geometry")]
    EmptyBoundary,
    #[error("mdgrid: perturbation degenerates cell {cell} (measure {measure:e})")]
    InvalidPerturbation { cell: usize, measure: f64 },
    #[error("mdgrid: mesh generation failed: {0}")]
    MeshGeneration(String),

    #[error("transfer: grids do not cover the same geometry (mismatch {mismatch:e})")]
    CoverageMismatch { mismatch: f64 },
    #[error("transfer: clipping produced a polygon of area {area:e} with fewer than three vertices")]
    DegenerateClip { area: f64 },
    #[error("transfer: point lies outside the transfer grid")]
    OutOfDomain,

    #[error("project: field does not live on the expected grid ({0})")]
    GridMismatch(String),
    #[error("project: singular local mass matrix on cell {cell}")]
    SingularMassMatrix { cell: usize },

    #[error("mdsolve: grid bundle inconsistent with domain: {0}")]
    InconsistentBundle(String),
    #[error("mdsolve: singular system ({0})")]
    SingularSystem(String),
    #[error("mdsolve: point lies outside cell {cell}")]
    OutOfCell { cell: usize },

    #[error("estimate: no reference solution available")]
    MissingReference,

    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
