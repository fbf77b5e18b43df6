//! JSON import and export of grids and grid bundles.

use serde::{Deserialize, Serialize};

use super::{CellMesh, FaceTag, GridBundle, SimplicialGrid};
use crate::geometry::Vec2;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub dim: usize,
    /// Flat `[x0, y0, x1, y1, ...]`.
    pub nodes: Vec<f64>,
    pub cells: Vec<Vec<usize>>,
    /// Node indices of every face, in the order of `boundary_tags`.
    pub faces: Vec<Vec<usize>>,
    pub boundary_tags: Vec<FaceTag>,
}

impl GridJson {
    pub fn from_grid<T: Real>(g: &SimplicialGrid<T>) -> Self {
        Self {
            dim: g.dim(),
            nodes: g.nodes().iter().flat_map(|p| p.to_array()).collect(),
            cells: (0..g.n_cells()).map(|k| g.cell_nodes(k).to_vec()).collect(),
            faces: (0..g.n_faces()).map(|f| g.face_nodes(f).to_vec()).collect(),
            boundary_tags: g.tags().to_vec(),
        }
    }

    pub fn to_grid<T: Real>(&self) -> Result<SimplicialGrid<T>> {
        if self.nodes.len() % 2 != 0 {
            return Err(Error::MeshGeneration("node array must hold coordinate pairs".into()));
        }
        let nodes = self.nodes.chunks(2).map(|c| Vec2::from_array([c[0], c[1]])).collect();
        let mut g = SimplicialGrid::new(self.dim, nodes, self.cells.clone())?;
        if self.faces.len() != self.boundary_tags.len() {
            return Err(Error::MeshGeneration("faces and boundary_tags differ in length".into()));
        }
        let mut lookup = std::collections::HashMap::new();
        for f in 0..g.n_faces() {
            let mut key = g.face_nodes(f).to_vec();
            key.sort_unstable();
            lookup.insert(key, f);
        }
        for (nodes, tag) in self.faces.iter().zip(&self.boundary_tags) {
            let mut key = nodes.clone();
            key.sort_unstable();
            let f = *lookup
                .get(&key)
                .ok_or_else(|| Error::MeshGeneration(format!("face {nodes:?} is not a face of the grid")))?;
            g.set_tag(f, *tag);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleJson {
    pub subdomains: Vec<GridJson>,
    pub interfaces: Vec<GridJson>,
    pub internal_boundaries: Vec<GridJson>,
    pub internal_boundary_faces: Vec<Vec<usize>>,
}

impl BundleJson {
    pub fn from_bundle<T: Real>(b: &GridBundle<T>) -> Self {
        Self {
            subdomains: b.subdomain_grids.iter().map(GridJson::from_grid).collect(),
            interfaces: b.interface_grids.iter().map(GridJson::from_grid).collect(),
            internal_boundaries: b.internal_boundary_grids.iter().map(GridJson::from_grid).collect(),
            internal_boundary_faces: b.internal_boundary_faces.clone(),
        }
    }
}

pub fn write_bundle<T: Real>(b: &GridBundle<T>, path: &std::path::Path) -> Result<()> {
    let text = serde_json::to_string(&BundleJson::from_bundle(b))?;
    std::fs::write(path, text)?;
    Ok(())
}
