//! End-to-end tokenize / detokenize / round-trip.

use crate::error::{Error, Result};
use crate::geometry::{Aabb, UnitCubeMap};
use crate::latent::LatentEncoder;
use crate::tokens::coords::{dequantize_box, HALF_BIN};
use crate::tokens::{
    encode_stream, latent_codes, parse_stream, resolve_unassigned, ComplexityClass, DecodeMode,
    DecodedStream, TokenStream,
};
use crate::topology::{assign_window_tags, traversal_plan, BRepGraph, FaceRef, TraversalPlan, WindowStride};

pub const DEFAULT_MAX_FACES: usize = 100;
pub const DEFAULT_MAX_EDGES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizeOptions {
    pub meta: Option<ComplexityClass>,
    pub stride: WindowStride,
    /// `(faces, edges)` ceiling; `None` disables the guardrail.
    pub limits: Option<(usize, usize)>,
}

impl Default for TokenizeOptions {
    fn default() -> Self {
        Self {
            meta: None,
            stride: WindowStride::One,
            limits: Some((DEFAULT_MAX_FACES, DEFAULT_MAX_EDGES)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tokenized {
    pub stream: TokenStream,
    /// Tagged plan over `normalized`.
    pub plan: TraversalPlan,
    /// The input mapped into `[-1, 1]^3`.
    pub normalized: BRepGraph,
    pub map: UnitCubeMap,
}

/// Normalizes the solid into the unit cube, encodes every primitive and
/// serializes the breadth-first plan.
pub fn tokenize(
    g: &BRepGraph,
    encoder: &dyn LatentEncoder,
    opts: &TokenizeOptions,
) -> Result<Tokenized> {
    if g.faces.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if let Some((max_faces, max_edges)) = opts.limits {
        if g.face_count() > max_faces || g.edge_count() > max_edges {
            return Err(Error::TooLarge {
                faces: g.face_count(),
                edges: g.edge_count(),
                max_faces,
                max_edges,
            });
        }
    }
    if let Some(c) = opts.meta.filter(|c| !c.admits(g.face_count())) {
        return Err(Error::Contract(format!(
            "complexity class {c} does not admit {} faces",
            g.face_count()
        )));
    }
    if let Some(e) = g.edges.iter().position(|e| e.is_dangling()) {
        return Err(Error::Contract(format!(
            "edge {e} has an unassigned face; only autocomplete prefixes may contain those"
        )));
    }
    let (normalized, map) = g.normalized()?;
    let plan = assign_window_tags(&traversal_plan(&normalized)?, opts.stride)?;
    let codes = latent_codes(&normalized, encoder)?;
    let stream = encode_stream(&normalized, &plan, opts.meta, &codes)?;
    Ok(Tokenized {
        stream,
        plan,
        normalized,
        map,
    })
}

#[derive(Debug, Clone)]
pub struct Detokenized {
    /// Geometry in the stream's `[-1, 1]^3` frame; faces in stream order.
    pub graph: BRepGraph,
    pub decoded: DecodedStream,
    /// Edges still lacking a second face after `T_u` resolution.
    pub dangling: Vec<usize>,
}

pub fn detokenize(
    tokens: &[u16],
    encoder: &dyn LatentEncoder,
    mode: DecodeMode,
    stride: WindowStride,
) -> Result<Detokenized> {
    let mut decoded = parse_stream(tokens, mode, stride)?;
    let dangling = match mode {
        DecodeMode::Autocomplete => resolve_unassigned(&mut decoded),
        DecodeMode::Unconditional => Vec::new(),
    };
    let graph = decoded.to_graph(encoder)?;
    Ok(Detokenized {
        graph,
        decoded,
        dangling,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub tokens: usize,
    pub faces: usize,
    pub edges: usize,
    pub levels: usize,
    pub topology_ok: bool,
    /// Largest per-axis difference between original and recovered box corners.
    pub max_placement_error: f64,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.topology_ok && self.max_placement_error <= HALF_BIN
    }
}

fn corner_error(a: &Aabb, b: &Aabb) -> f64 {
    (0..3)
        .flat_map(|k| [(a.min[k] - b.min[k]).abs(), (a.max[k] - b.max[k]).abs()])
        .fold(0.0, f64::max)
}

/// Tokenizes, parses back and compares incidence (in visiting order) and
/// box placement in the normalized frame.
pub fn roundtrip(
    g: &BRepGraph,
    encoder: &dyn LatentEncoder,
    opts: &TokenizeOptions,
) -> Result<RoundtripReport> {
    let t = tokenize(g, encoder, opts)?;
    let d = parse_stream(&t.stream, DecodeMode::Unconditional, opts.stride)?;

    let order = t.plan.face_order();
    let mut position = vec![0usize; order.len()];
    for (p, &f) in order.iter().enumerate() {
        position[f] = p;
    }
    let mut expected: Vec<Vec<FaceRef>> = t
        .normalized
        .edges
        .iter()
        .map(|e| {
            let mut v: Vec<FaceRef> = e
                .faces
                .iter()
                .map(|r| match r {
                    FaceRef::Face(f) => FaceRef::Face(position[*f]),
                    FaceRef::Unassigned => FaceRef::Unassigned,
                })
                .collect();
            v.sort();
            v
        })
        .collect();
    expected.sort();
    let topology_ok = d.faces.len() == order.len() && d.incidence_multiset() == expected;

    let mut err: f64 = 0.0;
    for (df, &f) in d.faces.iter().zip(&order) {
        err = err.max(corner_error(&dequantize_box(&df.bins), &t.normalized.faces[f].bbox));
    }
    let edge_order = t
        .plan
        .levels
        .iter()
        .flatten()
        .flat_map(|f| f.edges.iter().map(|e| e.edge));
    for (de, e) in d.edges.iter().zip(edge_order) {
        err = err.max(corner_error(&dequantize_box(&de.bins), &t.normalized.edges[e].bbox));
    }
    Ok(RoundtripReport {
        tokens: t.stream.len(),
        faces: d.faces.len(),
        edges: d.edges.len(),
        levels: d.levels.len(),
        topology_ok,
        max_placement_error: err,
    })
}
