//! JSON interchange for B-Rep graphs.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "faces": [{"points": [[x, y, z], ...], "orientation_out": true, "bbox": {...}}],
//!   "edges": [{"points": [[x, y, z], ...], "faces": [0, null]}],
//!   "labels": {"bolt_holes": [], "hull_planes": [], "complexity": "easy"}
//! }
//! ```
//! Face grids hold 1024 points row-major over `(u, v)`; edges hold 32.
//! `null` marks an unassigned face. `bbox` is optional and recomputed when absent.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compute_aabb, Aabb, EdgeGrid, FaceGrid, Point3, PointGrid};
use crate::tokens::ComplexityClass;
use crate::topology::{BRepGraph, Edge, Face, FaceRef};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub points: Vec<Point3>,
    #[serde(default)]
    pub orientation_out: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Aabb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub points: Vec<Point3>,
    pub faces: Vec<FaceRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<Aabb>,
}

/// Ground truth attached by the generators.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default)]
    pub bolt_holes: Vec<usize>,
    #[serde(default)]
    pub hull_planes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BRepDocument {
    pub schema: u32,
    pub faces: Vec<FaceRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
}

fn record_box(given: Option<Aabb>, grid: &impl PointGrid) -> Result<Aabb> {
    match given {
        Some(b) => Aabb::new(b.min, b.max),
        None => compute_aabb(grid),
    }
}

impl BRepDocument {
    pub fn from_graph(g: &BRepGraph, labels: Option<Labels>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            faces: g
                .faces
                .iter()
                .map(|f| FaceRecord {
                    points: f.grid.points().to_vec(),
                    orientation_out: f.grid.orientation_out,
                    bbox: Some(f.bbox),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    points: e.grid.points().to_vec(),
                    faces: e.faces.clone(),
                    bbox: Some(e.bbox),
                })
                .collect(),
            labels,
        }
    }

    pub fn to_graph(&self) -> Result<BRepGraph> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let mut faces = Vec::with_capacity(self.faces.len());
        for (i, f) in self.faces.iter().enumerate() {
            let grid = FaceGrid::new(f.points.clone(), f.orientation_out)
                .map_err(|e| Error::MalformedGeometry(format!("face {i}: {e}")))?;
            let bbox = record_box(f.bbox, &grid)?;
            faces.push(Face { grid, bbox });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let grid = EdgeGrid::new(e.points.clone())
                .map_err(|err| Error::MalformedGeometry(format!("edge {i}: {err}")))?;
            let bbox = record_box(e.bbox, &grid)?;
            edges.push(Edge {
                grid,
                bbox,
                faces: e.faces.clone(),
            });
        }
        let g = BRepGraph::new(faces, edges)?;
        if let Some(l) = &self.labels {
            if let Some(&bad) = l
                .bolt_holes
                .iter()
                .chain(&l.hull_planes)
                .find(|&&f| f >= g.face_count())
            {
                return Err(Error::Format(format!("label names missing face {bad}")));
            }
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
