//! Top-K maximum inner product search with median elimination bandits whose
//! arms are finite reward lists pulled without replacement.
//!
//! * [`bandit`] holds the sample-size bounds and the elimination loop.
//! * [`mips`] casts inner-product and nearest-neighbor queries as bandits.
//! * [`baselines`] has exhaustive search and an LSH comparison index.
//! * [`data`] and [`io`] generate datasets and read or write files.
//! * [`experiment`] drives validation and comparison runs.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod baselines;
pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod mips;
pub mod vectors;

pub use error::{Error, Result};
pub use exec::Execution;
pub use vectors::{Query, VectorSet};
