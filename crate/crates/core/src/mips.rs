//! Maximum inner product and nearest neighbor search as bandit problems.
//!
//! Arm `i` stands for vector `v_i`; its reward list is the `N` per-coordinate
//! terms `f(i, j)` of the objective, computed on demand when pulled. For
//! inner products the true mean of arm `i` is `q . v_i / N`, so `epsilon` is
//! measured on that per-coordinate scale. Multiply by `N` to read it on the
//! inner-product scale.

use serde::{Deserialize, Serialize};

use crate::bandit::{
    median_elimination_topk, ArmState, ArmSummary, EliminationConfig, EliminationOutcome,
    EliminationTrace, RewardSource,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::vectors::{Query, VectorSet};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// `f(i, j) = v_i^(j) * q^(j)`
    #[default]
    InnerProduct,
    /// `f(i, j) = -(q^(j) - v_i^(j))^2`
    NegSqDistance,
}

impl ObjectiveKind {
    pub fn term(self, v: f32, q: f32) -> f64 {
        match self {
            ObjectiveKind::InnerProduct => v as f64 * q as f64,
            ObjectiveKind::NegSqDistance => {
                let d = q as f64 - v as f64;
                -(d * d)
            }
        }
    }
}

/// Reward list of one vector against one query, evaluated lazily.
#[derive(Clone, Copy, Debug)]
pub struct LazyArm<'a> {
    vector: &'a [f32],
    query: &'a [f32],
    kind: ObjectiveKind,
}

impl RewardSource for LazyArm<'_> {
    fn len(&self) -> usize {
        self.vector.len()
    }

    fn reward(&self, position: usize) -> f64 {
        self.kind.term(self.vector[position], self.query[position])
    }
}

pub fn build_arms<'a>(
    vectors: &'a VectorSet,
    query: &'a Query,
    kind: ObjectiveKind,
) -> Result<Vec<LazyArm<'a>>> {
    query.ensure_dim(vectors.dim())?;
    Ok(vectors
        .iter()
        .map(|vector| LazyArm {
            vector,
            query: query.values(),
            kind,
        })
        .collect())
}

/// Closed interval containing every reward of every arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardRange {
    pub low: f64,
    pub high: f64,
}

impl RewardRange {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Range from the coordinate bounds `M_v` and `M_q`: `[-M_v M_q, M_v M_q]`
/// for inner products and `[-(M_q + M_v)^2, 0]` for negative squared distance.
pub fn reward_range(
    vectors: &VectorSet,
    query: &Query,
    kind: ObjectiveKind,
) -> Result<RewardRange> {
    query.ensure_dim(vectors.dim())?;
    let mv = vectors.coord_bound() as f64;
    let mq = query.coord_bound() as f64;
    let range = match kind {
        ObjectiveKind::InnerProduct => RewardRange {
            low: -mv * mq,
            high: mv * mq,
        },
        ObjectiveKind::NegSqDistance => RewardRange {
            low: -(mq + mv) * (mq + mv),
            high: 0.0,
        },
    };
    if !(range.width() > 0.0) {
        return Err(Error::DegenerateRange {
            low: range.low,
            high: range.high,
        });
    }
    Ok(range)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub execution: Execution,
}

impl SearchParams {
    pub fn new(k: usize, epsilon: f64, delta: f64, seed: u64) -> Self {
        SearchParams {
            k,
            epsilon,
            delta,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Median elimination over the lazily evaluated arms of `vectors` against
/// `query`. A zero-width reward range means every arm has the same mean; the
/// first `K` ids are then returned unpulled with `trace.degenerate` set.
pub fn search_topk(
    vectors: &VectorSet,
    query: &Query,
    kind: ObjectiveKind,
    params: &SearchParams,
) -> Result<EliminationOutcome> {
    let arms = build_arms(vectors, query, kind)?;
    let config = EliminationConfig::new(params.k, params.epsilon, params.delta)
        .with_seed(params.seed)
        .with_execution(params.execution);
    if arms.len() <= params.k {
        return median_elimination_topk(&arms, &config);
    }
    let range = match reward_range(vectors, query, kind) {
        Ok(r) => r,
        Err(Error::DegenerateRange { .. }) => {
            config.validate()?;
            let ids: Vec<usize> = (0..params.k).collect();
            return Ok(EliminationOutcome {
                trace: EliminationTrace {
                    list_len: vectors.dim(),
                    arm_count: vectors.rows(),
                    returned: ids
                        .iter()
                        .map(|&i| ArmSummary::from(&ArmState::new(i)))
                        .collect(),
                    degenerate: true,
                    ..Default::default()
                },
                arms: ids,
            });
        }
        Err(e) => return Err(e),
    };
    median_elimination_topk(&arms, &config.with_range_width(range.width()))
}

pub fn mips_topk(
    vectors: &VectorSet,
    query: &Query,
    params: &SearchParams,
) -> Result<EliminationOutcome> {
    search_topk(vectors, query, ObjectiveKind::InnerProduct, params)
}

pub fn nns_topk(
    vectors: &VectorSet,
    query: &Query,
    params: &SearchParams,
) -> Result<EliminationOutcome> {
    search_topk(vectors, query, ObjectiveKind::NegSqDistance, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_product_rewards() {
        let vs = VectorSet::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let q = Query::new(vec![1.0; 3]).unwrap();
        let arms = build_arms(&vs, &q, ObjectiveKind::InnerProduct).unwrap();
        let list: Vec<f64> = (0..3).map(|j| arms[0].reward(j)).collect();
        assert_eq!(list, vec![1.0, 2.0, 3.0]);
        assert_eq!(arms[0].true_mean(), 2.0);
    }

    #[test]
    fn self_distance_is_zero() {
        let vs = VectorSet::new(1, 4, vec![0.5, -1.0, 2.0, 9.0]).unwrap();
        let q = vs.query(0);
        let arm = build_arms(&vs, &q, ObjectiveKind::NegSqDistance).unwrap()[0];
        assert!((0..4).all(|j| arm.reward(j) == 0.0));
        assert_eq!(arm.true_mean(), 0.0);
    }

    #[test]
    fn range_arithmetic() {
        let vs = VectorSet::new(2, 2, vec![1.0, -1.0, 0.5, 0.0]).unwrap();
        let q = Query::new(vec![-1.0, 0.25]).unwrap();
        let r = reward_range(&vs, &q, ObjectiveKind::InnerProduct).unwrap();
        assert_eq!((r.low, r.high, r.width()), (-1.0, 1.0, 2.0));
        let r = reward_range(&vs, &q, ObjectiveKind::NegSqDistance).unwrap();
        assert_eq!((r.low, r.high), (-4.0, 0.0));

        let zero = Query::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            reward_range(&vs, &zero, ObjectiveKind::InnerProduct),
            Err(Error::DegenerateRange { .. })
        ));
        assert!(build_arms(
            &vs,
            &Query::new(vec![1.0]).unwrap(),
            ObjectiveKind::InnerProduct
        )
        .is_err());
    }

    #[test]
    fn degenerate_query_falls_back() {
        let vs = VectorSet::new(4, 2, vec![1.0; 8]).unwrap();
        let zero = Query::new(vec![0.0, 0.0]).unwrap();
        let out = mips_topk(&vs, &zero, &SearchParams::new(2, 0.1, 0.1, 0)).unwrap();
        assert_eq!(out.arms, vec![0, 1]);
        assert!(out.trace.degenerate);
        assert_eq!(out.trace.total_pulls, 0);
    }

    #[test]
    fn one_hot_argmax() {
        let n = 8;
        let mut data = vec![0.0f32; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        let vs = VectorSet::new(n, n, data).unwrap();
        let mut q = vec![0.0f32; n];
        q[1] = 1.0;
        let q = Query::new(q).unwrap();
        // Separation is 1/N on the mean scale.
        let out = mips_topk(&vs, &q, &SearchParams::new(1, 0.5 / n as f64, 0.05, 3)).unwrap();
        assert_eq!(out.arms, vec![1]);
    }

    #[test]
    fn n_at_most_k_is_immediate() {
        let vs = VectorSet::new(3, 2, vec![1.0; 6]).unwrap();
        let q = Query::new(vec![1.0, 1.0]).unwrap();
        let out = mips_topk(&vs, &q, &SearchParams::new(3, 0.1, 0.1, 0)).unwrap();
        assert_eq!(out.arms, vec![0, 1, 2]);
        assert_eq!(out.trace.total_pulls, 0);
    }
}
