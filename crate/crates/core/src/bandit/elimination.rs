use serde::Serialize;

use super::arm::{Arm, ArmState};
use super::bound::{elimination_schedule, round_pull_target};
use super::source::RewardSource;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Parameters of a top-K median elimination run.
///
/// `epsilon` is measured on the scale of the arms' mean rewards and
/// `range_width` is the width `b - a` of an interval holding every reward.
/// An `epsilon` of zero requests exact answers: every round then pulls each
/// survivor to exhaustion.
#[derive(Clone, Debug, PartialEq)]
pub struct EliminationConfig {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub range_width: f64,
    pub seed: u64,
    pub execution: Execution,
}

impl EliminationConfig {
    pub fn new(k: usize, epsilon: f64, delta: f64) -> Self {
        EliminationConfig {
            k,
            epsilon,
            delta,
            range_width: 1.0,
            seed: 0,
            execution: Execution::default(),
        }
    }

    pub fn with_range_width(mut self, range_width: f64) -> Self {
        self.range_width = range_width;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.range_width > 0.0 && self.range_width.is_finite()) {
            return Err(Error::Config(format!(
                "range width must be positive, got {}",
                self.range_width
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub survivors: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Target from the sample-size schedule.
    pub scheduled_pulls: usize,
    /// Pulls per survivor since the start, after the monotonicity clamp.
    pub cumulative_pulls: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm_id: usize,
    pub pulls: usize,
    pub empirical_mean: Option<f64>,
}

impl From<&ArmState> for ArmSummary {
    fn from(s: &ArmState) -> Self {
        ArmSummary {
            arm_id: s.arm_id,
            pulls: s.pulls,
            empirical_mean: s.empirical_mean(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EliminationTrace {
    pub rounds: Vec<RoundRecord>,
    pub total_pulls: u64,
    /// Largest pull count of any arm, eliminated or not.
    pub max_arm_pulls: usize,
    /// Length of every arm's reward list.
    pub list_len: usize,
    pub arm_count: usize,
    /// Returned arms, best empirical mean first.
    pub returned: Vec<ArmSummary>,
    /// Set when the search bypassed the bandit loop because all arms are
    /// indistinguishable (zero-width reward range).
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EliminationOutcome {
    pub arms: Vec<usize>,
    pub trace: EliminationTrace,
}

/// Number of arms a round removes: `ceil((survivors - k) / 2)`.
pub fn removal_count(survivors: usize, k: usize) -> usize {
    (survivors - k).div_ceil(2)
}

fn mean_key(s: &ArmState) -> f64 {
    s.empirical_mean().unwrap_or(f64::NEG_INFINITY)
}

/// Drops the `ceil((|S| - K)/2)` arms with the smallest empirical means.
/// Among equal means the larger arm id goes first. Survivors keep their
/// relative order and state.
pub fn eliminate<T: AsRef<ArmState>>(mut survivors: Vec<T>, k: usize) -> Result<Vec<T>> {
    if survivors.len() <= k {
        return Err(Error::Precondition(format!(
            "elimination needs more than K={k} arms, got {}",
            survivors.len()
        )));
    }
    let remove = removal_count(survivors.len(), k);
    let mut order: Vec<(f64, usize)> = survivors
        .iter()
        .map(|a| (mean_key(a.as_ref()), a.as_ref().arm_id))
        .collect();
    order.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut doomed: Vec<usize> = order[..remove].iter().map(|&(_, id)| id).collect();
    doomed.sort_unstable();
    survivors.retain(|a| doomed.binary_search(&a.as_ref().arm_id).is_err());
    Ok(survivors)
}

fn ranked_summaries<T: AsRef<ArmState>>(arms: &[T]) -> Vec<ArmSummary> {
    let mut out: Vec<ArmSummary> = arms.iter().map(|a| ArmSummary::from(a.as_ref())).collect();
    out.sort_by(|x, y| {
        let (mx, my) = (
            x.empirical_mean.unwrap_or(f64::NEG_INFINITY),
            y.empirical_mean.unwrap_or(f64::NEG_INFINITY),
        );
        my.total_cmp(&mx).then(x.arm_id.cmp(&y.arm_id))
    });
    out
}

/// Returns `K` arms whose K-th highest true mean is within `epsilon` of the
/// best possible with probability at least `1 - delta`, pulling each arm at
/// most `N` times.
///
/// Arm `i` is `sources[i]`. With `n <= K` every arm is returned unpulled.
pub fn median_elimination_topk<S: RewardSource>(
    sources: &[S],
    config: &EliminationConfig,
) -> Result<EliminationOutcome> {
    config.validate()?;
    let n = sources.len();
    if n == 0 {
        return Err(Error::Precondition("at least one arm is required".into()));
    }
    let list_len = sources[0].len();
    if let Some((i, s)) = sources
        .iter()
        .enumerate()
        .find(|(_, s)| s.len() != list_len)
    {
        return Err(Error::Config(format!(
            "arm {i} has {} rewards, arm 0 has {list_len}",
            s.len()
        )));
    }
    if list_len == 0 {
        return Err(Error::Config("reward lists must be non-empty".into()));
    }

    let k = config.k;
    let mut trace = EliminationTrace {
        list_len,
        arm_count: n,
        ..Default::default()
    };
    if n <= k {
        trace.returned = (0..n)
            .map(|i| ArmSummary::from(&ArmState::new(i)))
            .collect();
        return Ok(EliminationOutcome {
            arms: (0..n).collect(),
            trace,
        });
    }

    let mut arms: Vec<Arm<'_, S>> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| Arm::new(i, s, config.seed))
        .collect();
    let mut pulled = 0usize;
    let mut round = 1u32;
    while arms.len() > k {
        let (eps_l, delta_l) = elimination_schedule(config.epsilon, config.delta, round)?;
        let scheduled =
            round_pull_target(arms.len(), k, eps_l, delta_l, config.range_width, list_len)?;
        let cumulative = scheduled.max(pulled);
        let step = cumulative - pulled;
        if step > 0 {
            config
                .execution
                .map_mut(&mut arms, |arm| arm.pull_batch(step))
                .into_iter()
                .collect::<Result<()>>()?;
        }
        trace.total_pulls += (arms.len() * step) as u64;
        trace.rounds.push(RoundRecord {
            round,
            survivors: arms.len(),
            epsilon: eps_l,
            delta: delta_l,
            scheduled_pulls: scheduled,
            cumulative_pulls: cumulative,
        });
        pulled = cumulative;
        arms = eliminate(arms, k)?;
        round += 1;
    }
    trace.max_arm_pulls = pulled;
    trace.returned = ranked_summaries(&arms);
    Ok(EliminationOutcome {
        arms: trace.returned.iter().map(|s| s.arm_id).collect(),
        trace,
    })
}
