use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::vectors::{dot, Query, VectorSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    /// Best first; equal scores keep the smaller id first.
    pub ids: Vec<usize>,
    pub scores: Vec<f64>,
    /// Scalar multiplications performed, `n * N`.
    pub ops: u64,
}

/// Sorts `(score, id)` pairs best first and keeps `k`.
pub(crate) fn top_by_score(mut scored: Vec<(f64, usize)>, k: usize) -> (Vec<usize>, Vec<f64>) {
    let cmp = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    scored.into_iter().map(|(s, i)| (i, s)).unzip()
}

/// Exhaustive top-K by inner product.
pub fn naive_topk(
    vectors: &VectorSet,
    query: &Query,
    k: usize,
    execution: Execution,
) -> Result<ExactResult> {
    query.ensure_dim(vectors.dim())?;
    if k > vectors.rows() {
        return Err(Error::Precondition(format!(
            "K={k} exceeds the {} vectors",
            vectors.rows()
        )));
    }
    let q = query.values();
    let scores = execution.map_range(vectors.rows(), |i| dot(vectors.row(i), q));
    let scored: Vec<(f64, usize)> = scores
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let (ids, scores) = top_by_score(scored, k);
    Ok(ExactResult {
        ids,
        scores,
        ops: (vectors.rows() * vectors.dim()) as u64,
    })
}
