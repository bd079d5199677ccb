//! Finite reward lists that arms draw from.

/// Order in which an arm reveals the positions of its reward list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullOrder {
    /// Uniformly random unconsumed position (sampling without replacement).
    Uniform,
    /// Positions `0, 1, 2, ...` in stored order.
    Fixed,
}

/// A finite list of `len()` rewards. Rewards may be stored or computed on
/// demand; either way `reward(j)` must be a pure function of `j`.
pub trait RewardSource: Sync {
    fn len(&self) -> usize;

    fn reward(&self, position: usize) -> f64;

    fn order(&self) -> PullOrder {
        PullOrder::Uniform
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean of the full list.
    fn true_mean(&self) -> f64 {
        let n = self.len();
        (0..n).map(|j| self.reward(j)).sum::<f64>() / n as f64
    }
}

impl<S: RewardSource + ?Sized> RewardSource for &S {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn reward(&self, position: usize) -> f64 {
        (**self).reward(position)
    }

    fn order(&self) -> PullOrder {
        (**self).order()
    }
}

/// A stored reward list sampled uniformly without replacement.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterializedRewards(pub Vec<f64>);

impl RewardSource for MaterializedRewards {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn reward(&self, position: usize) -> f64 {
        self.0[position]
    }
}

/// A stored reward list revealed in its stored order.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedOrderRewards(pub Vec<f64>);

impl RewardSource for FixedOrderRewards {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn reward(&self, position: usize) -> f64 {
        self.0[position]
    }

    fn order(&self) -> PullOrder {
        PullOrder::Fixed
    }
}

/// `ones` rewards of 1 followed by `len - ones` rewards of 0, revealed in
/// that order. The adversarial instances use this to hide low arms behind
/// a run of ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OnesFirst {
    pub ones: usize,
    pub len: usize,
}

impl RewardSource for OnesFirst {
    fn len(&self) -> usize {
        self.len
    }

    fn reward(&self, position: usize) -> f64 {
        debug_assert!(position < self.len);
        if position < self.ones {
            1.0
        } else {
            0.0
        }
    }

    fn order(&self) -> PullOrder {
        PullOrder::Fixed
    }

    fn true_mean(&self) -> f64 {
        self.ones as f64 / self.len as f64
    }
}
