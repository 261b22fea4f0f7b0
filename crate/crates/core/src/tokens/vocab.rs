//! Fixed vocabulary layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const VOCAB_VERSION: u32 = 1;

pub const SEQ_START: u16 = 0;
pub const SEQ_END: u16 = 1;
pub const BREP_START: u16 = 2;
pub const BREP_END: u16 = 3;
pub const LEVEL_END: u16 = 4;
pub const FACE_END: u16 = 5;
pub const META_OPEN: u16 = 6;
pub const META_CLOSE: u16 = 7;
pub const EASY: u16 = 8;
pub const MEDIUM: u16 = 9;
pub const HARD: u16 = 10;
pub const RANDOM: u16 = 11;
pub const COORD_BASE: u16 = 12;
pub const FACE_CODE_BASE: u16 = 1036;
pub const EDGE_CODE_BASE: u16 = 2036;
pub const TAG_BASE: u16 = 3036;
pub const TAG_UNASSIGNED: u16 = 3236;
pub const VOCAB_SIZE: u16 = 3237;

pub const CODEBOOK_SIZE: u16 = 1000;
pub const TAG_COUNT: u16 = 200;

/// Complexity class from the face count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityClass {
    Easy,
    Medium,
    Hard,
    Random,
}

impl ComplexityClass {
    /// Easy below 25 faces, Medium 25 to 50, Hard above 50.
    pub fn from_face_count(n: usize) -> Self {
        match n {
            0..=24 => ComplexityClass::Easy,
            25..=50 => ComplexityClass::Medium,
            _ => ComplexityClass::Hard,
        }
    }

    pub fn admits(self, faces: usize) -> bool {
        self == ComplexityClass::Random || Self::from_face_count(faces) == self
    }

    pub fn token(self) -> u16 {
        match self {
            ComplexityClass::Easy => EASY,
            ComplexityClass::Medium => MEDIUM,
            ComplexityClass::Hard => HARD,
            ComplexityClass::Random => RANDOM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexityClass::Easy => "easy",
            ComplexityClass::Medium => "medium",
            ComplexityClass::Hard => "hard",
            ComplexityClass::Random => "random",
        }
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexityClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(ComplexityClass::Easy),
            "medium" => Ok(ComplexityClass::Medium),
            "hard" => Ok(ComplexityClass::Hard),
            "random" => Ok(ComplexityClass::Random),
            _ => Err(Error::Contract(format!("unknown complexity class {s}"))),
        }
    }
}

/// A classified vocabulary id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    SeqStart,
    SeqEnd,
    BrepStart,
    BrepEnd,
    LevelEnd,
    FaceEnd,
    MetaOpen,
    MetaClose,
    Complexity(ComplexityClass),
    Coord(u16),
    FaceCode(u16),
    EdgeCode(u16),
    Ref(u16),
    RefUnassigned,
}

/// Coarse token kinds used for statistics and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Sentinel,
    Meta,
    Coord,
    FaceCode,
    EdgeCode,
    Ref,
}

impl TokenKind {
    pub const ALL: [TokenKind; 6] = [
        TokenKind::Sentinel,
        TokenKind::Meta,
        TokenKind::Coord,
        TokenKind::FaceCode,
        TokenKind::EdgeCode,
        TokenKind::Ref,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Sentinel => "sentinel",
            TokenKind::Meta => "meta",
            TokenKind::Coord => "coord",
            TokenKind::FaceCode => "face_code",
            TokenKind::EdgeCode => "edge_code",
            TokenKind::Ref => "reference",
        }
    }
}

impl Token {
    pub fn from_id(id: u16) -> Option<Token> {
        Some(match id {
            SEQ_START => Token::SeqStart,
            SEQ_END => Token::SeqEnd,
            BREP_START => Token::BrepStart,
            BREP_END => Token::BrepEnd,
            LEVEL_END => Token::LevelEnd,
            FACE_END => Token::FaceEnd,
            META_OPEN => Token::MetaOpen,
            META_CLOSE => Token::MetaClose,
            EASY => Token::Complexity(ComplexityClass::Easy),
            MEDIUM => Token::Complexity(ComplexityClass::Medium),
            HARD => Token::Complexity(ComplexityClass::Hard),
            RANDOM => Token::Complexity(ComplexityClass::Random),
            COORD_BASE..FACE_CODE_BASE => Token::Coord(id - COORD_BASE),
            FACE_CODE_BASE..EDGE_CODE_BASE => Token::FaceCode(id - FACE_CODE_BASE),
            EDGE_CODE_BASE..TAG_BASE => Token::EdgeCode(id - EDGE_CODE_BASE),
            TAG_BASE..TAG_UNASSIGNED => Token::Ref(id - TAG_BASE),
            TAG_UNASSIGNED => Token::RefUnassigned,
            _ => return None,
        })
    }

    pub fn id(self) -> u16 {
        match self {
            Token::SeqStart => SEQ_START,
            Token::SeqEnd => SEQ_END,
            Token::BrepStart => BREP_START,
            Token::BrepEnd => BREP_END,
            Token::LevelEnd => LEVEL_END,
            Token::FaceEnd => FACE_END,
            Token::MetaOpen => META_OPEN,
            Token::MetaClose => META_CLOSE,
            Token::Complexity(c) => c.token(),
            Token::Coord(b) => COORD_BASE + b,
            Token::FaceCode(c) => FACE_CODE_BASE + c,
            Token::EdgeCode(c) => EDGE_CODE_BASE + c,
            Token::Ref(t) => TAG_BASE + t,
            Token::RefUnassigned => TAG_UNASSIGNED,
        }
    }

    pub fn kind(self) -> TokenKind {
        match self {
            Token::SeqStart
            | Token::SeqEnd
            | Token::BrepStart
            | Token::BrepEnd
            | Token::LevelEnd
            | Token::FaceEnd => TokenKind::Sentinel,
            Token::MetaOpen | Token::MetaClose | Token::Complexity(_) => TokenKind::Meta,
            Token::Coord(_) => TokenKind::Coord,
            Token::FaceCode(_) => TokenKind::FaceCode,
            Token::EdgeCode(_) => TokenKind::EdgeCode,
            Token::Ref(_) | Token::RefUnassigned => TokenKind::Ref,
        }
    }

    /// Short description for diagnostics.
    pub fn describe(self) -> String {
        match self {
            Token::SeqStart => "SEQ_START".into(),
            Token::SeqEnd => "SEQ_END".into(),
            Token::BrepStart => "BREP_START".into(),
            Token::BrepEnd => "BREP_END".into(),
            Token::LevelEnd => "LEVEL_END".into(),
            Token::FaceEnd => "FACE_END".into(),
            Token::MetaOpen => "META_OPEN".into(),
            Token::MetaClose => "META_CLOSE".into(),
            Token::Complexity(c) => c.name().to_ascii_uppercase(),
            Token::Coord(b) => format!("coordinate bin {b}"),
            Token::FaceCode(c) => format!("face code {c}"),
            Token::EdgeCode(c) => format!("edge code {c}"),
            Token::Ref(t) => format!("T{t}"),
            Token::RefUnassigned => "T_u".into(),
        }
    }
}

/// Human-readable table of id ranges.
pub fn manifest() -> String {
    let rows: [(&str, u16, u16); 17] = [
        ("SEQ_START", SEQ_START, SEQ_START),
        ("SEQ_END", SEQ_END, SEQ_END),
        ("BREP_START", BREP_START, BREP_START),
        ("BREP_END", BREP_END, BREP_END),
        ("LEVEL_END", LEVEL_END, LEVEL_END),
        ("FACE_END", FACE_END, FACE_END),
        ("META_OPEN", META_OPEN, META_OPEN),
        ("META_CLOSE", META_CLOSE, META_CLOSE),
        ("EASY", EASY, EASY),
        ("MEDIUM", MEDIUM, MEDIUM),
        ("HARD", HARD, HARD),
        ("RANDOM", RANDOM, RANDOM),
        ("COORD[0..1024]", COORD_BASE, FACE_CODE_BASE - 1),
        ("FACE_CODE[0..1000]", FACE_CODE_BASE, EDGE_CODE_BASE - 1),
        ("EDGE_CODE[0..1000]", EDGE_CODE_BASE, TAG_BASE - 1),
        ("T[0..200]", TAG_BASE, TAG_UNASSIGNED - 1),
        ("T_u", TAG_UNASSIGNED, TAG_UNASSIGNED),
    ];
    let mut s = format!("# breptok vocabulary v{VOCAB_VERSION}\n# size {VOCAB_SIZE}\n");
    s.push_str("# name first last\n");
    for (name, first, last) in rows {
        s.push_str(&format!("{name} {first} {last}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_classifies_once_and_round_trips() {
        let mut counts = std::collections::HashMap::new();
        for id in 0..VOCAB_SIZE {
            let t = Token::from_id(id).expect("in range");
            assert_eq!(t.id(), id);
            *counts.entry(t.kind()).or_insert(0) += 1;
        }
        assert_eq!(counts[&TokenKind::Sentinel], 6);
        assert_eq!(counts[&TokenKind::Meta], 6);
        assert_eq!(counts[&TokenKind::Coord], 1024);
        assert_eq!(counts[&TokenKind::FaceCode], 1000);
        assert_eq!(counts[&TokenKind::EdgeCode], 1000);
        assert_eq!(counts[&TokenKind::Ref], 201);
        assert_eq!(Token::from_id(VOCAB_SIZE), None);
        assert_eq!(Token::from_id(u16::MAX), None);
    }

    #[test]
    fn complexity_thresholds() {
        assert_eq!(ComplexityClass::from_face_count(24), ComplexityClass::Easy);
        assert_eq!(ComplexityClass::from_face_count(25), ComplexityClass::Medium);
        assert_eq!(ComplexityClass::from_face_count(50), ComplexityClass::Medium);
        assert_eq!(ComplexityClass::from_face_count(51), ComplexityClass::Hard);
        assert!(ComplexityClass::Random.admits(3));
        assert_eq!("HARD".parse::<ComplexityClass>().unwrap(), ComplexityClass::Hard);
    }

    #[test]
    fn manifest_lists_all_ranges() {
        let m = manifest();
        assert!(m.contains("T_u 3236 3236"));
        assert!(m.contains("COORD[0..1024] 12 1035"));
        assert_eq!(m.lines().filter(|l| !l.starts_with('#')).count(), 17);
    }
}
