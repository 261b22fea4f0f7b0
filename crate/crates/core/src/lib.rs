//! Tokenizer and detokenizer for boundary-representation solids given as
//! sampled point grids and a face adjacency graph.

pub mod constraints;
pub mod corpus;
pub mod document;
pub mod error;
pub mod fsq;
pub mod geometry;
pub mod latent;
pub mod metrics;
pub mod pipeline;
pub mod tokens;
pub mod topology;
pub mod validity;

pub use error::{Error, Result};
