//! Serialization of a tagged traversal plan into tokens.
//!
//! ```text
//! stream := SEQ_START [META_OPEN class META_CLOSE] BREP_START level+ BREP_END SEQ_END
//! level  := face+ LEVEL_END
//! face   := C*6 G_face*4 (C*6 G_edge*2 ref)* FACE_END
//! ```

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::geometry::{canonical_edge, canonical_face};
use crate::latent::LatentEncoder;
use crate::topology::{BRepGraph, FaceEntry, RefTag, TraversalPlan};

use super::coords::quantize_box;
use super::vocab::{
    ComplexityClass, Token, BREP_END, BREP_START, LEVEL_END, META_CLOSE, META_OPEN, SEQ_END,
    SEQ_START,
};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<u16>,
}

impl TokenStream {
    pub fn new(tokens: Vec<u16>) -> Self {
        Self { tokens }
    }
}

impl Deref for TokenStream {
    type Target = [u16];
    fn deref(&self) -> &[u16] {
        &self.tokens
    }
}

/// Latent codebook indices for every face and edge, indexed by graph id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimitiveCodes {
    pub faces: Vec<[u16; 4]>,
    pub edges: Vec<[u16; 2]>,
}

/// Canonicalizes and encodes every face and edge of `g`.
pub fn latent_codes(g: &BRepGraph, encoder: &dyn LatentEncoder) -> Result<PrimitiveCodes> {
    let faces = g
        .faces
        .iter()
        .map(|f| Ok(encoder.encode_face(&canonical_face(&f.grid)?).codes))
        .collect::<Result<Vec<_>>>()?;
    let edges = g
        .edges
        .iter()
        .map(|e| Ok(encoder.encode_edge(&canonical_edge(&e.grid)?).codes))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrimitiveCodes { faces, edges })
}

/// Expected length of a stream with the given counts.
pub fn token_count(meta: bool, levels: usize, faces: usize, edges: usize) -> usize {
    2 + if meta { 3 } else { 0 } + 1 + levels + 11 * faces + 9 * edges + 1
}

pub(crate) fn push_header(out: &mut Vec<u16>, meta: Option<ComplexityClass>) {
    out.push(SEQ_START);
    if let Some(c) = meta {
        out.extend([META_OPEN, c.token(), META_CLOSE]);
    }
    out.push(BREP_START);
}

pub(crate) fn push_box(out: &mut Vec<u16>, bins: &[u16; 6]) {
    out.extend(bins.iter().map(|&b| Token::Coord(b).id()));
}

pub(crate) fn push_ref(out: &mut Vec<u16>, tag: RefTag) {
    out.push(match tag {
        RefTag::Window(t) => Token::Ref(t).id(),
        RefTag::Unassigned => Token::RefUnassigned.id(),
    });
}

/// Tokens of one level, including its LEVEL_END.
pub(crate) fn push_level(
    out: &mut Vec<u16>,
    g: &BRepGraph,
    level: &[FaceEntry],
    codes: &PrimitiveCodes,
) -> Result<()> {
    for entry in level {
        let face = g
            .faces
            .get(entry.face)
            .ok_or_else(|| Error::Contract(format!("plan names missing face {}", entry.face)))?;
        let fcodes = codes
            .faces
            .get(entry.face)
            .ok_or_else(|| Error::Contract(format!("no latent code for face {}", entry.face)))?;
        push_box(out, &quantize_box(&face.bbox));
        out.extend(fcodes.iter().map(|&c| Token::FaceCode(c).id()));
        for e in &entry.edges {
            let edge = g
                .edges
                .get(e.edge)
                .ok_or_else(|| Error::Contract(format!("plan names missing edge {}", e.edge)))?;
            let ecodes = codes
                .edges
                .get(e.edge)
                .ok_or_else(|| Error::Contract(format!("no latent code for edge {}", e.edge)))?;
            push_box(out, &quantize_box(&edge.bbox));
            out.extend(ecodes.iter().map(|&c| Token::EdgeCode(c).id()));
            let tag = e
                .tag
                .ok_or_else(|| Error::Contract(format!("edge {} has no reference tag", e.edge)))?;
            push_ref(out, tag);
        }
        out.push(super::vocab::FACE_END);
    }
    out.push(LEVEL_END);
    Ok(())
}

fn check_codes(codes: &PrimitiveCodes) -> Result<()> {
    let bad = codes
        .faces
        .iter()
        .flatten()
        .chain(codes.edges.iter().flatten())
        .find(|&&c| c >= super::vocab::CODEBOOK_SIZE);
    match bad {
        Some(&c) => Err(Error::InvalidCode {
            index: c as usize,
            size: super::vocab::CODEBOOK_SIZE as usize,
        }),
        None => Ok(()),
    }
}

/// Emits the full stream for a graph already mapped into `[-1, 1]^3`.
pub fn encode_stream(
    g: &BRepGraph,
    plan: &TraversalPlan,
    meta: Option<ComplexityClass>,
    codes: &PrimitiveCodes,
) -> Result<TokenStream> {
    if plan.levels.is_empty() || g.faces.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if plan.face_count() != g.face_count() || plan.edge_count() != g.edge_count() {
        return Err(Error::Contract(format!(
            "plan covers {} faces / {} edges, graph has {} / {}",
            plan.face_count(),
            plan.edge_count(),
            g.face_count(),
            g.edge_count()
        )));
    }
    if codes.faces.len() != g.face_count() || codes.edges.len() != g.edge_count() {
        return Err(Error::Contract("latent code count differs from graph".into()));
    }
    check_codes(codes)?;
    let mut out = Vec::with_capacity(token_count(
        meta.is_some(),
        plan.levels.len(),
        g.face_count(),
        g.edge_count(),
    ));
    push_header(&mut out, meta);
    for level in &plan.levels {
        push_level(&mut out, g, level, codes)?;
    }
    out.extend([BREP_END, SEQ_END]);
    Ok(TokenStream::new(out))
}
