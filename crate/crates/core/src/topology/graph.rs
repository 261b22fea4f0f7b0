use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compute_aabb, Aabb, EdgeGrid, FaceGrid, Point3, UnitCubeMap};

/// One endpoint slot of an edge: a face index, or a face not known yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum FaceRef {
    Face(usize),
    Unassigned,
}

impl From<Option<usize>> for FaceRef {
    fn from(v: Option<usize>) -> Self {
        v.map_or(FaceRef::Unassigned, FaceRef::Face)
    }
}

impl From<FaceRef> for Option<usize> {
    fn from(r: FaceRef) -> Self {
        r.face()
    }
}

impl FaceRef {
    pub fn face(self) -> Option<usize> {
        match self {
            FaceRef::Face(f) => Some(f),
            FaceRef::Unassigned => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub grid: FaceGrid,
    pub bbox: Aabb,
}

impl Face {
    pub fn new(grid: FaceGrid) -> Result<Self> {
        let bbox = compute_aabb(&grid)?;
        Ok(Self { grid, bbox })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub grid: EdgeGrid,
    pub bbox: Aabb,
    /// Incident faces. A well-formed solid has exactly two entries.
    pub faces: Vec<FaceRef>,
}

impl Edge {
    pub fn new(grid: EdgeGrid, faces: Vec<FaceRef>) -> Result<Self> {
        let bbox = compute_aabb(&grid)?;
        Ok(Self { grid, bbox, faces })
    }

    pub fn between(grid: EdgeGrid, a: usize, b: usize) -> Result<Self> {
        Self::new(grid, vec![FaceRef::Face(a), FaceRef::Face(b)])
    }

    /// The two endpoints when the edge has exactly two slots.
    pub fn endpoints(&self) -> Option<(FaceRef, FaceRef)> {
        match self.faces.as_slice() {
            [a, b] => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn is_dangling(&self) -> bool {
        self.faces.contains(&FaceRef::Unassigned)
    }
}

/// Face adjacency multigraph with per-primitive geometry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BRepGraph {
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
}

impl BRepGraph {
    /// Builds a graph, rejecting edges that name missing faces.
    pub fn new(faces: Vec<Face>, edges: Vec<Edge>) -> Result<Self> {
        let g = Self { faces, edges };
        g.check_indices()?;
        Ok(g)
    }

    pub fn check_indices(&self) -> Result<()> {
        for (e, edge) in self.edges.iter().enumerate() {
            for r in &edge.faces {
                if let FaceRef::Face(f) = r {
                    if *f >= self.faces.len() {
                        return Err(Error::MalformedGeometry(format!(
                            "edge {e} references face {f} of {}",
                            self.faces.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Box around every face and edge.
    pub fn bbox(&self) -> Option<Aabb> {
        let boxes = self
            .faces
            .iter()
            .map(|f| f.bbox)
            .chain(self.edges.iter().map(|e| e.bbox));
        boxes.reduce(|a, b| a.union(&b))
    }

    /// Applies a point map to every grid and recomputes the boxes.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Result<BRepGraph> {
        let faces = self
            .faces
            .iter()
            .map(|face| Face::new(face.grid.map_points(&f)))
            .collect::<Result<_>>()?;
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.grid.map_points(&f), e.faces.clone()))
            .collect::<Result<_>>()?;
        Ok(BRepGraph { faces, edges })
    }

    /// The graph mapped into `[-1, 1]^3` by the uniform map of its own box.
    pub fn normalized(&self) -> Result<(BRepGraph, UnitCubeMap)> {
        let b = self.bbox().ok_or(Error::EmptyGraph)?;
        let map = UnitCubeMap::for_box(&b)?;
        // the box maps into [-1, 1]; clamping only removes rounding overshoot
        let g = self.map_points(|p| map.forward(p).map(|v| v.clamp(-1.0, 1.0)))?;
        Ok((g, map))
    }

    /// Sorted, deduplicated neighbour lists over fully assigned edges.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.faces.len()];
        for e in &self.edges {
            if let Some((FaceRef::Face(a), FaceRef::Face(b))) = e.endpoints() {
                if a < adj.len() && b < adj.len() {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        for n in &mut adj {
            n.sort_unstable();
            n.dedup();
        }
        adj
    }

    /// Sorted multiset of endpoint pairs, each pair in ascending order.
    pub fn incidence_multiset(&self) -> Vec<Vec<FaceRef>> {
        let mut out: Vec<Vec<FaceRef>> = self
            .edges
            .iter()
            .map(|e| {
                let mut f = e.faces.clone();
                f.sort();
                f
            })
            .collect();
        out.sort();
        out
    }
}
