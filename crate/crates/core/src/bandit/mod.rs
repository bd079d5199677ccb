//! Bandits whose arms hold finite reward lists pulled without replacement,
//! and the top-K median elimination algorithm over them.

pub mod arm;
pub mod bound;
pub mod elimination;
pub mod source;

pub use arm::{arm_seed, Arm, ArmState, PositionSampler};
pub use bound::{
    confidence_to_u, elimination_schedule, pull_target, rho, round_log_argument, round_pull_target,
    round_u, sample_size,
};
pub use elimination::{
    eliminate, median_elimination_topk, removal_count, ArmSummary, EliminationConfig,
    EliminationOutcome, EliminationTrace, RoundRecord,
};
pub use source::{FixedOrderRewards, MaterializedRewards, OnesFirst, PullOrder, RewardSource};
