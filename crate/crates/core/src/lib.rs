//! Re-ranking of language-model retrieval results by centrality in
//! generation graphs built over the top of the initial ranking.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod centrality;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod lm;
pub mod rerank;
pub mod retrieval;
pub mod synthetic;
pub mod trec;

pub use error::{Error, ErrorClass, Result};
