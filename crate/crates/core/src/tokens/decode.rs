//! Single-pass stream parser and graph reconstruction.

use crate::error::{Error, Result};
use crate::latent::{EdgeLatent, FaceLatent, LatentEncoder};
use crate::topology::{BRepGraph, Edge, Face, FaceRef, RefTag, WindowStride, WindowTracker};

use super::coords::dequantize_box;
use super::encode::{push_box, push_ref};
use super::vocab::{ComplexityClass, Token, FACE_END, LEVEL_END};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    #[default]
    Unconditional,
    /// Accepts `T_u` references.
    Autocomplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedFace {
    pub bins: [u16; 6],
    pub codes: [u16; 4],
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedEdge {
    pub bins: [u16; 6],
    pub codes: [u16; 2],
    /// Face the edge was listed under.
    pub owner: usize,
    pub other: FaceRef,
    /// Reference as written in the stream.
    pub tag: RefTag,
}

/// Parsed stream. Faces are numbered in stream order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodedStream {
    pub meta: Option<ComplexityClass>,
    pub faces: Vec<DecodedFace>,
    pub edges: Vec<DecodedEdge>,
    /// Face indices of each level.
    pub levels: Vec<Vec<usize>>,
    /// Number of header tokens before the first level.
    pub header_len: usize,
}

struct Cursor<'a> {
    tokens: &'a [u16],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self, expected: &str) -> Result<Token> {
        let id = *self.tokens.get(self.pos).ok_or_else(|| Error::UnexpectedEnd {
            position: self.pos,
            expected: expected.into(),
        })?;
        Token::from_id(id).ok_or_else(|| Error::Parse {
            position: self.pos,
            expected: expected.into(),
            found: format!("unknown id {id}"),
        })
    }

    fn fail<T>(&self, expected: &str, found: Token) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            expected: expected.into(),
            found: found.describe(),
        })
    }

    fn expect(&mut self, want: Token, expected: &str) -> Result<()> {
        let t = self.peek(expected)?;
        if t != want {
            return self.fail(expected, t);
        }
        self.pos += 1;
        Ok(())
    }

    fn coord_box(&mut self) -> Result<[u16; 6]> {
        let mut bins = [0u16; 6];
        for b in &mut bins {
            match self.peek("coordinate")? {
                Token::Coord(v) => *b = v,
                t => return self.fail("coordinate", t),
            }
            self.pos += 1;
        }
        Ok(bins)
    }
}

/// Parses a stream against the grammar and resolves references.
///
/// Never panics; every failure carries the offending token index.
pub fn parse_stream(
    tokens: &[u16],
    mode: DecodeMode,
    stride: WindowStride,
) -> Result<DecodedStream> {
    let mut c = Cursor { tokens, pos: 0 };
    let mut out = DecodedStream::default();
    c.expect(Token::SeqStart, "SEQ_START")?;
    if c.peek("META_OPEN or BREP_START")? == Token::MetaOpen {
        c.pos += 1;
        match c.peek("complexity class")? {
            Token::Complexity(k) => out.meta = Some(k),
            t => return c.fail("complexity class", t),
        }
        c.pos += 1;
        c.expect(Token::MetaClose, "META_CLOSE")?;
    }
    c.expect(Token::BrepStart, "BREP_START")?;
    out.header_len = c.pos;

    let mut tracker = WindowTracker::new(stride);
    loop {
        // level := face+ LEVEL_END
        let level = out.levels.len();
        tracker.begin_level();
        out.levels.push(Vec::new());
        loop {
            let bins = c.coord_box()?;
            let mut codes = [0u16; 4];
            for code in &mut codes {
                match c.peek("face code")? {
                    Token::FaceCode(v) => *code = v,
                    t => return c.fail("face code", t),
                }
                c.pos += 1;
            }
            let face = out.faces.len();
            out.faces.push(DecodedFace { bins, codes, level });
            out.levels[level].push(face);
            tracker.push_face(face);

            // (C*6 G_edge*2 ref)* FACE_END
            loop {
                match c.peek("coordinate or FACE_END")? {
                    Token::FaceEnd => {
                        c.pos += 1;
                        break;
                    }
                    Token::Coord(_) => {}
                    t => return c.fail("coordinate or FACE_END", t),
                }
                let bins = c.coord_box()?;
                let mut codes = [0u16; 2];
                for code in &mut codes {
                    match c.peek("edge code")? {
                        Token::EdgeCode(v) => *code = v,
                        t => return c.fail("edge code", t),
                    }
                    c.pos += 1;
                }
                let (tag, other) = match c.peek("reference")? {
                    Token::Ref(t) => match tracker.lookup(t as usize) {
                        Some(f) => (RefTag::Window(t), FaceRef::Face(f)),
                        None => {
                            return Err(Error::DanglingReference {
                                position: c.pos,
                                tag: t as usize,
                                visible: tracker.visible(),
                            })
                        }
                    },
                    Token::RefUnassigned => {
                        if mode != DecodeMode::Autocomplete {
                            return Err(Error::UnassignedReference { position: c.pos });
                        }
                        (RefTag::Unassigned, FaceRef::Unassigned)
                    }
                    t => return c.fail("reference", t),
                };
                c.pos += 1;
                out.edges.push(DecodedEdge {
                    bins,
                    codes,
                    owner: face,
                    other,
                    tag,
                });
            }
            match c.peek("coordinate or LEVEL_END")? {
                Token::LevelEnd => {
                    c.pos += 1;
                    break;
                }
                Token::Coord(_) => {}
                t => return c.fail("coordinate or LEVEL_END", t),
            }
        }
        match c.peek("coordinate or BREP_END")? {
            Token::BrepEnd => {
                c.pos += 1;
                break;
            }
            Token::Coord(_) => {}
            t => return c.fail("coordinate or BREP_END", t),
        }
    }
    c.expect(Token::SeqEnd, "SEQ_END")?;
    if c.pos != tokens.len() {
        let t = c.peek("end of stream")?;
        return c.fail("end of stream", t);
    }
    Ok(out)
}

impl DecodedStream {
    /// Tokens of level `l` rebuilt from the parsed structure, LEVEL_END included.
    pub fn level_tokens(&self, l: usize) -> Vec<u16> {
        let mut out = Vec::new();
        let Some(level) = self.levels.get(l) else {
            return out;
        };
        for &f in level {
            let face = &self.faces[f];
            push_box(&mut out, &face.bins);
            out.extend(face.codes.iter().map(|&c| Token::FaceCode(c).id()));
            for e in self.edges.iter().filter(|e| e.owner == f) {
                push_box(&mut out, &e.bins);
                out.extend(e.codes.iter().map(|&c| Token::EdgeCode(c).id()));
                push_ref(&mut out, e.tag);
            }
            out.push(FACE_END);
        }
        out.push(LEVEL_END);
        out
    }

    /// Places decoded geometry into the dequantized boxes.
    pub fn to_graph(&self, encoder: &dyn LatentEncoder) -> Result<BRepGraph> {
        let levels = encoder.levels();
        let mut faces = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let bbox = dequantize_box(&f.bins);
            let grid = encoder.decode_face(&FaceLatent::from_codes(f.codes, levels)?, &bbox)?;
            faces.push(Face { grid, bbox });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let bbox = dequantize_box(&e.bins);
            let grid = encoder.decode_edge(&EdgeLatent::from_codes(e.codes, levels)?, &bbox)?;
            edges.push(Edge {
                grid,
                bbox,
                faces: vec![FaceRef::Face(e.owner), e.other],
            });
        }
        BRepGraph::new(faces, edges)
    }

    /// Endpoint multiset in stream face numbering, each pair sorted.
    pub fn incidence_multiset(&self) -> Vec<Vec<FaceRef>> {
        let mut out: Vec<Vec<FaceRef>> = self
            .edges
            .iter()
            .map(|e| {
                let mut v = vec![FaceRef::Face(e.owner), e.other];
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }
}

/// Merges each `T_u` edge with a later concrete edge carrying the same
/// bins and codes and touching the `T_u` edge's owner. Returns the indices
/// (after merging) of edges that stay dangling.
pub fn resolve_unassigned(ds: &mut DecodedStream) -> Vec<usize> {
    let mut removed = vec![false; ds.edges.len()];
    for i in 0..ds.edges.len() {
        if ds.edges[i].other != FaceRef::Unassigned {
            continue;
        }
        let owner = ds.edges[i].owner;
        let found = (i + 1..ds.edges.len()).find(|&j| {
            let e = &ds.edges[j];
            !removed[j]
                && e.other != FaceRef::Unassigned
                && e.bins == ds.edges[i].bins
                && e.codes == ds.edges[i].codes
                && (e.owner == owner || e.other == FaceRef::Face(owner))
        });
        if let Some(j) = found {
            let e = &ds.edges[j];
            let partner = if e.owner == owner {
                e.other
            } else {
                FaceRef::Face(e.owner)
            };
            ds.edges[i].other = partner;
            removed[j] = true;
        }
    }
    let mut k = 0;
    ds.edges.retain(|_| {
        k += 1;
        !removed[k - 1]
    });
    ds.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.other == FaceRef::Unassigned)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokens::vocab::*;

    fn c(b: u16) -> u16 {
        COORD_BASE + b
    }

    /// Two faces, one edge between them, optional meta.
    fn two_faces() -> Vec<u16> {
        let mut t = vec![SEQ_START, BREP_START];
        t.extend([c(0); 6]);
        t.extend([FACE_CODE_BASE; 4]);
        t.extend([FACE_END, LEVEL_END]);
        t.extend([c(5); 6]);
        t.extend([FACE_CODE_BASE + 9; 4]);
        t.extend([c(1); 6]);
        t.extend([EDGE_CODE_BASE, EDGE_CODE_BASE + 1, TAG_BASE]);
        t.extend([FACE_END, LEVEL_END, BREP_END, SEQ_END]);
        t
    }

    #[test]
    fn parses_two_faces() {
        let d = parse_stream(&two_faces(), DecodeMode::Unconditional, WindowStride::One).unwrap();
        assert_eq!(d.faces.len(), 2);
        assert_eq!(d.levels, vec![vec![0], vec![1]]);
        assert_eq!(d.edges.len(), 1);
        assert_eq!(d.edges[0].owner, 1);
        assert_eq!(d.edges[0].other, FaceRef::Face(0));
        assert_eq!(d.edges[0].codes, [0, 1]);
        assert_eq!(d.header_len, 2);
    }

    #[test]
    fn level_tokens_reproduce_the_input() {
        let t = two_faces();
        let d = parse_stream(&t, DecodeMode::Unconditional, WindowStride::One).unwrap();
        let mut rebuilt = t[..d.header_len].to_vec();
        for l in 0..d.levels.len() {
            rebuilt.extend(d.level_tokens(l));
        }
        rebuilt.extend([BREP_END, SEQ_END]);
        assert_eq!(rebuilt, t);
    }

    #[test]
    fn wrong_kind_is_positioned() {
        let mut t = two_faces();
        t[2] = FACE_CODE_BASE;
        match parse_stream(&t, DecodeMode::Unconditional, WindowStride::One) {
            Err(Error::Parse { position: 2, expected, .. }) => assert_eq!(expected, "coordinate"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_seq_end() {
        let mut t = two_faces();
        t.pop();
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::UnexpectedEnd { position, .. }) if position == t.len()
        ));
    }

    #[test]
    fn trailing_tokens_rejected() {
        let mut t = two_faces();
        t.push(SEQ_END);
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_body_rejected() {
        let t = vec![SEQ_START, BREP_START, BREP_END, SEQ_END];
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::Parse { position: 2, .. })
        ));
        let t = vec![SEQ_START, BREP_START, LEVEL_END, BREP_END, SEQ_END];
        assert!(parse_stream(&t, DecodeMode::Unconditional, WindowStride::One).is_err());
    }

    #[test]
    fn tag_beyond_window() {
        let mut t = two_faces();
        let p = t.iter().position(|&x| x == TAG_BASE).unwrap();
        t[p] = TAG_BASE + 5;
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::DanglingReference { tag: 5, visible: 2, position }) if position == p
        ));
    }

    #[test]
    fn unassigned_only_in_autocomplete() {
        let mut t = two_faces();
        let p = t.iter().position(|&x| x == TAG_BASE).unwrap();
        t[p] = TAG_UNASSIGNED;
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::UnassignedReference { position }) if position == p
        ));
        let d = parse_stream(&t, DecodeMode::Autocomplete, WindowStride::One).unwrap();
        assert_eq!(d.edges[0].other, FaceRef::Unassigned);
    }

    #[test]
    fn unknown_id() {
        let mut t = two_faces();
        t[3] = VOCAB_SIZE + 4;
        assert!(matches!(
            parse_stream(&t, DecodeMode::Unconditional, WindowStride::One),
            Err(Error::Parse { position: 3, .. })
        ));
    }

    fn edge(owner: usize, other: FaceRef, bins: u16) -> DecodedEdge {
        DecodedEdge {
            bins: [bins; 6],
            codes: [1, 2],
            owner,
            other,
            tag: match other {
                FaceRef::Face(_) => RefTag::Window(0),
                FaceRef::Unassigned => RefTag::Unassigned,
            },
        }
    }

    fn stream_with(edges: Vec<DecodedEdge>) -> DecodedStream {
        DecodedStream {
            edges,
            ..Default::default()
        }
    }

    #[test]
    fn t_u_unifies_with_reemitted_edge() {
        let mut d = stream_with(vec![
            edge(0, FaceRef::Unassigned, 7),
            edge(3, FaceRef::Face(0), 7),
        ]);
        let dangling = resolve_unassigned(&mut d);
        assert!(dangling.is_empty());
        assert_eq!(d.edges.len(), 1);
        assert_eq!(d.edges[0].owner, 0);
        assert_eq!(d.edges[0].other, FaceRef::Face(3));
    }

    #[test]
    fn unmatched_t_u_stays_dangling() {
        let mut d = stream_with(vec![
            edge(0, FaceRef::Unassigned, 7),
            edge(3, FaceRef::Face(1), 7),
            edge(3, FaceRef::Face(0), 8),
        ]);
        assert_eq!(resolve_unassigned(&mut d), vec![0]);
        assert_eq!(d.edges.len(), 3);
    }

    #[test]
    fn no_t_u_is_identity() {
        let mut d = stream_with(vec![edge(1, FaceRef::Face(0), 3)]);
        let before = d.clone();
        assert!(resolve_unassigned(&mut d).is_empty());
        assert_eq!(d, before);
    }
}
