//! Exhaustive search and an LSH comparison baseline.

pub mod exact;
pub mod lsh;

pub use exact::{naive_topk, ExactResult};
pub use lsh::{lsh_build, lsh_query, LshIndex, LshResult};
