//! Vocabulary, stream encoding and parsing.

pub mod autocomplete;
pub mod coords;
pub mod decode;
pub mod encode;
pub mod format;
pub mod vocab;

pub use autocomplete::{autocomplete_split, encode_autocomplete_prefix, user_subgraph, AutocompleteSplit};
pub use coords::{dequantize_coord, quantize_coord};
pub use decode::{parse_stream, resolve_unassigned, DecodeMode, DecodedEdge, DecodedFace, DecodedStream};
pub use encode::{encode_stream, latent_codes, token_count, PrimitiveCodes, TokenStream};
pub use vocab::{ComplexityClass, Token, TokenKind};
