//! Conditioning prefixes: user faces become level 0, edges whose second
//! face is not among them carry `T_u`.

use crate::error::{Error, Result};
use crate::geometry::{Aabb, UnitCubeMap};
use crate::latent::LatentEncoder;
use crate::topology::{assign_window_tags, bft_levels, BRepGraph, Edge, FaceRef, WindowStride};
use crate::topology::window::WINDOW_CAPACITY;

use super::encode::{latent_codes, push_header, push_level, TokenStream};
use super::vocab::{ComplexityClass, BREP_END, SEQ_END};

/// Sub-graph on `user_faces` (renumbered in ascending original order).
/// Edges leaving the set keep their user endpoint and become dangling.
pub fn user_subgraph(full: &BRepGraph, user_faces: &[usize]) -> Result<BRepGraph> {
    let mut ids: Vec<usize> = user_faces.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != user_faces.len() {
        return Err(Error::Contract("user face list has duplicates".into()));
    }
    if let Some(&bad) = ids.iter().find(|&&f| f >= full.face_count()) {
        return Err(Error::Contract(format!("user face {bad} does not exist")));
    }
    let remap = |f: FaceRef| match f {
        FaceRef::Face(f) => ids.binary_search(&f).ok().map(FaceRef::Face),
        FaceRef::Unassigned => None,
    };
    let faces = ids.iter().map(|&f| full.faces[f].clone()).collect();
    let mut edges = Vec::new();
    for e in &full.edges {
        let mapped: Vec<Option<FaceRef>> = e.faces.iter().map(|&f| remap(f)).collect();
        if mapped.iter().all(Option::is_none) {
            continue;
        }
        edges.push(Edge {
            grid: e.grid.clone(),
            bbox: e.bbox,
            faces: mapped
                .into_iter()
                .map(|m| m.unwrap_or(FaceRef::Unassigned))
                .collect(),
        });
    }
    BRepGraph::new(faces, edges)
}

fn mapped(g: &BRepGraph, domain_box: &Aabb) -> Result<BRepGraph> {
    let map = UnitCubeMap::for_box(domain_box)?;
    g.map_points(|p| map.forward(p))
}

/// Prefix ending after level 0's LEVEL_END. Coordinates are taken relative
/// to `domain_box` mapped uniformly onto `[-1, 1]^3`.
pub fn encode_autocomplete_prefix(
    user: &BRepGraph,
    domain_box: &Aabb,
    encoder: &dyn LatentEncoder,
    stride: WindowStride,
    meta: Option<ComplexityClass>,
) -> Result<TokenStream> {
    if user.face_count() > WINDOW_CAPACITY {
        return Err(Error::WindowCapacity {
            level: 0,
            population: user.face_count(),
            limit: WINDOW_CAPACITY,
        });
    }
    let g = mapped(user, domain_box)?;
    let all: Vec<usize> = (0..g.face_count()).collect();
    let plan = assign_window_tags(&bft_levels(&g, &all)?, stride)?;
    let codes = latent_codes(&g, encoder)?;
    let mut out = Vec::new();
    push_header(&mut out, meta);
    push_level(&mut out, &g, &plan.levels[0], &codes)?;
    Ok(TokenStream::new(out))
}

/// A conditioning prefix together with the continuation that completes
/// `full` when traversal starts from the user faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutocompleteSplit {
    pub prefix: TokenStream,
    pub continuation: TokenStream,
}

impl AutocompleteSplit {
    pub fn joined(&self) -> Vec<u16> {
        [self.prefix.tokens.as_slice(), &self.continuation].concat()
    }
}

pub fn autocomplete_split(
    full: &BRepGraph,
    user_faces: &[usize],
    domain_box: &Aabb,
    encoder: &dyn LatentEncoder,
    stride: WindowStride,
    meta: Option<ComplexityClass>,
) -> Result<AutocompleteSplit> {
    let user = user_subgraph(full, user_faces)?;
    let prefix = encode_autocomplete_prefix(&user, domain_box, encoder, stride, meta)?;
    let g = mapped(full, domain_box)?;
    let plan = assign_window_tags(&bft_levels(&g, user_faces)?, stride)?;
    let codes = latent_codes(&g, encoder)?;
    let mut out = Vec::new();
    for level in &plan.levels[1..] {
        push_level(&mut out, &g, level, &codes)?;
    }
    out.extend([BREP_END, SEQ_END]);
    Ok(AutocompleteSplit {
        prefix,
        continuation: TokenStream::new(out),
    })
}
