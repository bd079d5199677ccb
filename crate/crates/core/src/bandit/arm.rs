use rustc_hash::FxHashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::source::{PullOrder, RewardSource};
use crate::error::{Error, Result};
use crate::exec::mix_seed;

/// Draws positions `0..len` without replacement in uniformly random order.
///
/// A Fisher-Yates shuffle over a virtual identity array. Only displaced
/// entries are stored, in a map while they are few and in a dense array once
/// they exceed `len / 16`, so memory stays proportional to the number of
/// draws. The draw sequence does not depend on the representation.
#[derive(Clone, Debug)]
pub struct PositionSampler {
    len: usize,
    drawn: usize,
    slots: Slots,
    rng: ChaCha8Rng,
}

#[derive(Clone, Debug)]
enum Slots {
    Sparse(FxHashMap<usize, usize>),
    Dense(Vec<u32>),
}

const DENSE_FRACTION: usize = 16;

impl PositionSampler {
    pub fn new(len: usize, seed: u64) -> Self {
        PositionSampler {
            len,
            drawn: 0,
            slots: Slots::Sparse(FxHashMap::default()),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn remaining(&self) -> usize {
        self.len - self.drawn
    }

    /// Number of stored entries.
    pub fn footprint(&self) -> usize {
        match &self.slots {
            Slots::Sparse(map) => map.len(),
            Slots::Dense(v) => v.len(),
        }
    }

    fn densify(&mut self) {
        if let Slots::Sparse(map) = &self.slots {
            if self.len <= u32::MAX as usize && map.len() * DENSE_FRACTION > self.len {
                let mut dense: Vec<u32> = (0..self.len as u32).collect();
                for (&k, &v) in map {
                    dense[k] = v as u32;
                }
                self.slots = Slots::Dense(dense);
            }
        }
    }
}

impl Iterator for PositionSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.drawn == self.len {
            return None;
        }
        let head = self.drawn;
        let pick = self.rng.random_range(head..self.len);
        self.drawn += 1;
        match &mut self.slots {
            Slots::Dense(v) => {
                v.swap(head, pick);
                Some(v[head] as usize)
            }
            Slots::Sparse(map) => {
                let head_value = map.remove(&head).unwrap_or(head);
                let value = if pick == head {
                    head_value
                } else {
                    map.insert(pick, head_value).unwrap_or(pick)
                };
                self.densify();
                Some(value)
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining(), Some(self.remaining()))
    }
}

#[derive(Clone, Debug)]
enum Cursor {
    Uniform(Box<PositionSampler>),
    Fixed { next: usize, len: usize },
}

impl Cursor {
    fn remaining(&self) -> usize {
        match self {
            Cursor::Uniform(s) => s.remaining(),
            Cursor::Fixed { next, len } => len - next,
        }
    }

    fn next_position(&mut self) -> Option<usize> {
        match self {
            Cursor::Uniform(s) => s.next(),
            Cursor::Fixed { next, len } => {
                if *next == *len {
                    None
                } else {
                    *next += 1;
                    Some(*next - 1)
                }
            }
        }
    }
}

/// Running statistics of one arm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmState {
    pub arm_id: usize,
    pub pulls: usize,
    pub reward_sum: f64,
}

impl ArmState {
    pub fn new(arm_id: usize) -> Self {
        ArmState {
            arm_id,
            pulls: 0,
            reward_sum: 0.0,
        }
    }

    /// `None` before the first pull.
    pub fn empirical_mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }
}

impl AsRef<ArmState> for ArmState {
    fn as_ref(&self) -> &ArmState {
        self
    }
}

/// Per-arm RNG seed; depends only on the master seed and the arm id.
pub fn arm_seed(master: u64, arm_id: usize) -> u64 {
    mix_seed(master, arm_id as u64)
}

/// An arm bound to its reward source, with its own sampling state.
#[derive(Clone, Debug)]
pub struct Arm<'a, S> {
    source: &'a S,
    state: ArmState,
    cursor: Cursor,
}

impl<'a, S: RewardSource> Arm<'a, S> {
    pub fn new(arm_id: usize, source: &'a S, master_seed: u64) -> Self {
        let len = source.len();
        let cursor = match source.order() {
            PullOrder::Uniform => Cursor::Uniform(Box::new(PositionSampler::new(
                len,
                arm_seed(master_seed, arm_id),
            ))),
            PullOrder::Fixed => Cursor::Fixed { next: 0, len },
        };
        Arm {
            source,
            state: ArmState::new(arm_id),
            cursor,
        }
    }

    pub fn state(&self) -> &ArmState {
        &self.state
    }

    pub fn remaining(&self) -> usize {
        self.cursor.remaining()
    }

    /// Draws `count` more rewards and folds them into the running sum.
    /// Asking for more than the unconsumed remainder is an error and draws nothing.
    pub fn pull_batch(&mut self, count: usize) -> Result<()> {
        let remaining = self.remaining();
        if count > remaining {
            return Err(Error::Overdraw {
                arm_id: self.state.arm_id,
                requested: count,
                remaining,
            });
        }
        for _ in 0..count {
            let position = self
                .cursor
                .next_position()
                .expect("remainder checked above");
            self.state.reward_sum += self.source.reward(position);
        }
        self.state.pulls += count;
        Ok(())
    }

    /// Like `pull_batch`, but also returns the drawn rewards in draw order.
    pub fn pull_rewards(&mut self, count: usize) -> Result<Vec<f64>> {
        let remaining = self.remaining();
        if count > remaining {
            return Err(Error::Overdraw {
                arm_id: self.state.arm_id,
                requested: count,
                remaining,
            });
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let position = self
                .cursor
                .next_position()
                .expect("remainder checked above");
            let r = self.source.reward(position);
            self.state.reward_sum += r;
            out.push(r);
        }
        self.state.pulls += count;
        Ok(out)
    }
}

impl<S> AsRef<ArmState> for Arm<'_, S> {
    fn as_ref(&self) -> &ArmState {
        &self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::source::{FixedOrderRewards, MaterializedRewards, OnesFirst};
    use proptest::prelude::*;
    use rand::Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn sampler_is_a_permutation() {
        for len in [0usize, 1, 2, 17, 1000] {
            let mut got: Vec<usize> = PositionSampler::new(len, 3).collect();
            got.sort_unstable();
            assert_eq!(got, (0..len).collect::<Vec<_>>());
        }
    }

    #[test]
    fn sparse_and_dense_draws_agree() {
        // Reference: plain Fisher-Yates over a full array with the same RNG.
        let len = 500;
        let mut rng = ChaCha8Rng::seed_from_u64(arm_seed(4, 2));
        let mut full: Vec<usize> = (0..len).collect();
        let expected: Vec<usize> = (0..len)
            .map(|i| {
                let j = rng.random_range(i..len);
                full.swap(i, j);
                full[i]
            })
            .collect();
        let got: Vec<usize> = PositionSampler::new(len, arm_seed(4, 2)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn sampler_memory_tracks_draws() {
        let mut s = PositionSampler::new(10_000_000, 9);
        for _ in 0..100 {
            s.next();
        }
        assert!(s.footprint() <= 100);
    }

    #[test]
    fn exhausting_gives_exact_mean() {
        let src = MaterializedRewards(vec![1.0, 0.0, 0.0, 0.0]);
        let mut arm = Arm::new(0, &src, 11);
        arm.pull_batch(4).unwrap();
        assert_eq!(arm.state().empirical_mean(), Some(0.25));
    }

    #[test]
    fn fixed_order_returns_ones_first() {
        let src = FixedOrderRewards(vec![1., 1., 1., 0., 0., 0., 0., 0., 0., 0.]);
        let mut arm = Arm::new(0, &src, 0);
        arm.pull_batch(3).unwrap();
        assert_eq!(arm.state().empirical_mean(), Some(1.0));

        let compact = OnesFirst { ones: 3, len: 10 };
        let mut arm = Arm::new(0, &compact, 0);
        assert_eq!(arm.pull_rewards(4).unwrap(), vec![1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn overdraw_is_an_error() {
        let src = MaterializedRewards(vec![0.5; 5]);
        let mut arm = Arm::new(2, &src, 1);
        arm.pull_batch(3).unwrap();
        let err = arm.pull_batch(3).unwrap_err();
        assert!(matches!(
            err,
            Error::Overdraw {
                arm_id: 2,
                requested: 3,
                remaining: 2
            }
        ));
        assert_eq!(arm.state().pulls, 3);
        assert_eq!(ArmState::new(0).empirical_mean(), None);
    }

    #[test]
    fn pulls_are_deterministic_per_arm() {
        let src = MaterializedRewards((0..100).map(f64::from).collect());
        let a: Vec<f64> = Arm::new(4, &src, 99).pull_rewards(30).unwrap();
        let b: Vec<f64> = Arm::new(4, &src, 99).pull_rewards(30).unwrap();
        let c: Vec<f64> = Arm::new(5, &src, 99).pull_rewards(30).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn two_draws_cover_the_list(rewards in prop::collection::vec(-5.0f64..5.0, 1..60), split in 0usize..60, seed: u64) {
            let split = split.min(rewards.len());
            let src = MaterializedRewards(rewards.clone());
            let mut arm = Arm::new(0, &src, seed);
            let mut seen = arm.pull_rewards(split).unwrap();
            seen.extend(arm.pull_rewards(rewards.len() - split).unwrap());
            prop_assert_eq!(sorted(seen), sorted(rewards));
        }
    }
}
