//! Synthetic datasets: adversarial bandit instances and random vector sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bandit::OnesFirst;
use crate::error::{Error, Result};
use crate::exec::{mix_seed, Execution};
use crate::vectors::VectorSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Adversarial,
    Gaussian,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub dist: Distribution,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(dist: Distribution, n: usize, dim: usize, seed: u64) -> Self {
        DatasetSpec { dist, n, dim, seed }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 {
            return Err(Error::Config(format!(
                "dataset must be non-empty, got {}x{}",
                self.n, self.dim
            )));
        }
        Ok(())
    }
}

/// Arms with Bernoulli-like reward lists that reveal all their ones first.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialInstance {
    /// Drawn means `r_a`, uniform on `[0, 1)`.
    pub true_means: Vec<f64>,
    /// Per arm, `floor(r_a * N + 0.5)` ones followed by zeros.
    pub arms: Vec<OnesFirst>,
}

impl AdversarialInstance {
    /// Realized mean of each reward list, `ones / N`.
    pub fn list_means(&self) -> Vec<f64> {
        self.arms
            .iter()
            .map(|a| a.ones as f64 / a.len as f64)
            .collect()
    }

    pub fn list_len(&self) -> usize {
        self.arms.first().map_or(0, |a| a.len)
    }
}

pub fn ones_for_mean(mean: f64, len: usize) -> usize {
    ((mean * len as f64 + 0.5).floor() as usize).min(len)
}

pub fn adversarial_from_means(true_means: Vec<f64>, len: usize) -> AdversarialInstance {
    let arms = true_means
        .iter()
        .map(|&r| OnesFirst {
            ones: ones_for_mean(r, len),
            len,
        })
        .collect();
    AdversarialInstance { true_means, arms }
}

pub fn gen_adversarial(spec: &DatasetSpec) -> Result<AdversarialInstance> {
    spec.check()?;
    if spec.dist != Distribution::Adversarial {
        return Err(Error::Config(format!(
            "expected an adversarial spec, got {:?}",
            spec.dist
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means = (0..spec.n).map(|_| rng.random::<f64>()).collect();
    Ok(adversarial_from_means(means, spec.dim))
}

/// Standard normal or `Uniform[0, 1)` entries; row `i` depends only on
/// `(seed, i)`.
pub fn gen_vectors(spec: &DatasetSpec, execution: Execution) -> Result<VectorSet> {
    spec.check()?;
    let dist = spec.dist;
    if dist == Distribution::Adversarial {
        return Err(Error::Config(
            "adversarial instances are not vector sets".into(),
        ));
    }
    let rows = execution.map_range(spec.n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, i as u64));
        (0..spec.dim)
            .map(|_| match dist {
                Distribution::Gaussian => rng.sample::<f32, _>(StandardNormal),
                _ => rng.random::<f32>(),
            })
            .collect::<Vec<f32>>()
    });
    VectorSet::new(spec.n, spec.dim, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adversarial_lists() {
        let inst = adversarial_from_means(vec![0.3, 0.0, 1.0], 10);
        assert_eq!(inst.arms[0], OnesFirst { ones: 3, len: 10 });
        assert_eq!(inst.arms[1].ones, 0);
        assert_eq!(inst.arms[2].ones, 10);
        assert_eq!(inst.list_means(), vec![0.3, 0.0, 1.0]);
    }

    #[test]
    fn adversarial_is_seeded() {
        let spec = DatasetSpec::new(Distribution::Adversarial, 200, 77, 5);
        let a = gen_adversarial(&spec).unwrap();
        assert_eq!(a, gen_adversarial(&spec).unwrap());
        assert_ne!(
            a,
            gen_adversarial(&DatasetSpec { seed: 6, ..spec }).unwrap()
        );
        for (r, m) in a.true_means.iter().zip(a.list_means()) {
            assert!((0.0..1.0).contains(r));
            assert!((r - m).abs() <= 1.0 / (2.0 * 77.0) + 1e-12);
        }
        assert!(gen_adversarial(&DatasetSpec {
            dist: Distribution::Gaussian,
            ..spec
        })
        .is_err());
    }

    #[test]
    fn vectors_are_seeded_and_ranged() {
        let spec = DatasetSpec::new(Distribution::Uniform, 2, 3, 1);
        let a = gen_vectors(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, gen_vectors(&spec, Execution::Sequential).unwrap());
        let big = gen_vectors(
            &DatasetSpec::new(Distribution::Uniform, 100, 1000, 2),
            Execution::Parallel,
        )
        .unwrap();
        assert!(big.as_slice().iter().all(|v| (0.0..1.0).contains(v)));
        assert!(gen_vectors(
            &DatasetSpec::new(Distribution::Gaussian, 0, 3, 1),
            Execution::Parallel
        )
        .is_err());
    }

    #[test]
    fn gaussian_mean_is_centered() {
        let spec = DatasetSpec::new(Distribution::Gaussian, 1000, 1000, 3);
        let vs = gen_vectors(&spec, Execution::Parallel).unwrap();
        let n = vs.as_slice().len() as f64;
        let mean = vs.as_slice().iter().map(|&v| v as f64).sum::<f64>() / n;
        assert!(mean.abs() <= 5.0 / n.sqrt(), "mean {mean}");
    }
}
