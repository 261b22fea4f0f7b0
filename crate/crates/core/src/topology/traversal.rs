//! Breadth-first traversal of the face adjacency graph into ordered levels.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::tokens::coords::quantize_box;

use super::graph::{BRepGraph, FaceRef};

/// Reference carried by an edge token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefTag {
    /// Index into the active reference window.
    Window(u16),
    /// The second face is not known yet.
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeEntry {
    pub edge: usize,
    /// The earlier-visited endpoint; the owning face itself for self-loops.
    pub other: FaceRef,
    /// Filled in by window assignment.
    pub tag: Option<RefTag>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceEntry {
    pub face: usize,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraversalPlan {
    pub levels: Vec<Vec<FaceEntry>>,
}

impl TraversalPlan {
    /// Face ids in visiting order.
    pub fn face_order(&self) -> Vec<usize> {
        self.levels.iter().flatten().map(|e| e.face).collect()
    }

    pub fn face_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.levels.iter().flatten().map(|e| e.edges.len()).sum()
    }

    /// Level sizes.
    pub fn shape(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

/// Quantized `[min x, min y, min z, max x, max y, max z]`, the within-level sort key.
pub fn box_key(b: &Aabb) -> [u16; 6] {
    quantize_box(b)
}

/// Quantized `[min z, min y, min x, max z, max y, max x]`: smallest is bottom-leftmost.
pub fn start_key(b: &Aabb) -> [u16; 6] {
    let k = quantize_box(b);
    [k[2], k[1], k[0], k[5], k[4], k[3]]
}

pub fn pick_start_face(g: &BRepGraph) -> Result<usize> {
    (0..g.faces.len())
        .min_by_key(|&f| (start_key(&g.faces[f].bbox), f))
        .ok_or(Error::EmptyGraph)
}

fn sort_level(g: &BRepGraph, level: &mut [usize]) {
    level.sort_by_key(|&f| (box_key(&g.faces[f].bbox), f));
}

/// Owner face and the earlier endpoint of every edge.
fn edge_owner(
    g: &BRepGraph,
    e: usize,
    position: &[usize],
) -> Result<(usize, FaceRef)> {
    let edge = &g.edges[e];
    let (a, b) = edge.endpoints().ok_or_else(|| {
        Error::Contract(format!(
            "edge {e} has {} incident faces; tokenization needs two",
            edge.faces.len()
        ))
    })?;
    match (a, b) {
        (FaceRef::Face(a), FaceRef::Face(b)) => {
            if position[a] >= position[b] {
                Ok((a, FaceRef::Face(b)))
            } else {
                Ok((b, FaceRef::Face(a)))
            }
        }
        (FaceRef::Face(f), FaceRef::Unassigned) | (FaceRef::Unassigned, FaceRef::Face(f)) => {
            Ok((f, FaceRef::Unassigned))
        }
        _ => Err(Error::Contract(format!("edge {e} has no assigned face"))),
    }
}

/// Levels of a breadth-first traversal started from `start` (level 0).
///
/// Faces inside a level are ordered by quantized box, then id. Each edge
/// is listed under the later-visited endpoint; entries are ordered by the
/// earlier endpoint's visiting position, then quantized edge box, then id,
/// with unassigned references last.
pub fn bft_levels(g: &BRepGraph, start: &[usize]) -> Result<TraversalPlan> {
    let n = g.faces.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    g.check_indices()?;
    if start.is_empty() {
        return Err(Error::Contract("traversal needs at least one start face".into()));
    }
    let mut visited = vec![false; n];
    let mut level: Vec<usize> = Vec::new();
    for &f in start {
        if f >= n || visited[f] {
            return Err(Error::Contract(format!("invalid or repeated start face {f}")));
        }
        visited[f] = true;
        level.push(f);
    }
    sort_level(g, &mut level);

    let adj = g.adjacency();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    while !level.is_empty() {
        let mut next = Vec::new();
        for &f in &level {
            for &m in &adj[f] {
                if !visited[m] {
                    visited[m] = true;
                    next.push(m);
                }
            }
        }
        sort_level(g, &mut next);
        levels.push(std::mem::replace(&mut level, next));
    }
    let orphans: Vec<usize> = (0..n).filter(|&f| !visited[f]).collect();
    if !orphans.is_empty() {
        return Err(Error::Disconnected { orphans });
    }

    let mut position = vec![0; n];
    for (p, &f) in levels.iter().flatten().enumerate() {
        position[f] = p;
    }
    let mut grouped: Vec<Vec<EdgeEntry>> = vec![Vec::new(); n];
    for e in 0..g.edges.len() {
        let (owner, other) = edge_owner(g, e, &position)?;
        grouped[owner].push(EdgeEntry {
            edge: e,
            other,
            tag: None,
        });
    }
    for list in &mut grouped {
        list.sort_by(|x, y| edge_order(g, &position, x, y));
    }

    Ok(TraversalPlan {
        levels: levels
            .into_iter()
            .map(|lv| {
                lv.into_iter()
                    .map(|f| FaceEntry {
                        face: f,
                        edges: std::mem::take(&mut grouped[f]),
                    })
                    .collect()
            })
            .collect(),
    })
}

fn edge_order(g: &BRepGraph, position: &[usize], x: &EdgeEntry, y: &EdgeEntry) -> Ordering {
    let rank = |e: &EdgeEntry| match e.other {
        FaceRef::Face(f) => position[f],
        FaceRef::Unassigned => usize::MAX,
    };
    rank(x)
        .cmp(&rank(y))
        .then_with(|| box_key(&g.edges[x.edge].bbox).cmp(&box_key(&g.edges[y.edge].bbox)))
        .then(x.edge.cmp(&y.edge))
}

/// Plan for an unconditional stream: traversal from the bottom-leftmost face.
pub fn traversal_plan(g: &BRepGraph) -> Result<TraversalPlan> {
    let start = pick_start_face(g)?;
    bft_levels(g, &[start])
}
