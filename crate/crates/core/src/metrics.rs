use crate::error::{Error, Result};

/// Fraction of the true top-K found in the returned top-K.
pub fn precision(returned: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    if returned.len() != k || truth.len() != k || k == 0 {
        return Err(Error::Precondition(format!(
            "precision needs K={k} returned and true ids, got {} and {}",
            returned.len(),
            truth.len()
        )));
    }
    let hits = returned.iter().filter(|id| truth.contains(id)).count();
    Ok(hits as f64 / k as f64)
}

fn kth_highest(mut values: Vec<f64>, k: usize) -> f64 {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values[k - 1]
}

/// K-th highest true mean overall minus the K-th highest true mean among
/// the returned arms.
pub fn suboptimality(returned: &[usize], true_means: &[f64], k: usize) -> Result<f64> {
    if k == 0 || returned.len() != k || k > true_means.len() {
        return Err(Error::Precondition(format!(
            "suboptimality needs K={k} returned ids out of {} arms, got {}",
            true_means.len(),
            returned.len()
        )));
    }
    if let Some(&bad) = returned.iter().find(|&&i| i >= true_means.len()) {
        return Err(Error::Precondition(format!("arm id {bad} out of range")));
    }
    let best = kth_highest(true_means.to_vec(), k);
    let got = kth_highest(returned.iter().map(|&i| true_means[i]).collect(), k);
    Ok(best - got)
}

/// Nearest-rank percentile: the value at 1-based rank `ceil(p * len)` of the
/// ascending sort, with the rank clamped to `[1, len]`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Precondition("percentile of an empty list".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "percentile level {p} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precision_examples() {
        assert_eq!(precision(&[1, 2, 3], &[3, 2, 1], 3).unwrap(), 1.0);
        assert_eq!(precision(&[1, 2], &[3, 4], 2).unwrap(), 0.0);
        assert_eq!(
            precision(&[1, 2, 3, 4, 5], &[5, 4, 3, 9, 8], 5).unwrap(),
            0.6
        );
        assert!(precision(&[1], &[1, 2], 2).is_err());
    }

    #[test]
    fn suboptimality_examples() {
        assert_eq!(suboptimality(&[0], &[0.9, 0.4], 1).unwrap(), 0.0);
        assert_eq!(suboptimality(&[1], &[0.9, 0.4], 1).unwrap(), 0.5);
        assert_eq!(
            suboptimality(&[2, 0], &[0.9, 0.4, 0.8, 0.1], 2).unwrap(),
            0.0
        );
        assert!((suboptimality(&[3, 0], &[0.9, 0.4, 0.8, 0.1], 2).unwrap() - 0.7).abs() < 1e-12);
        assert!(suboptimality(&[7], &[0.9, 0.4], 1).is_err());
    }

    #[test]
    fn percentile_examples() {
        let v = [3.0, 1.0, 4.0, 2.0];
        assert_eq!(percentile(&v, 1.0).unwrap(), 4.0);
        assert_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&v, 0.5).unwrap(), 2.0);
        assert_eq!(percentile(&v, 0.51).unwrap(), 3.0);
        assert!(percentile(&[], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn suboptimality_matches_rank_oracle(means in prop::collection::vec(0.0f64..1.0, 1..60), k in 1usize..6, seed: u64) {
            let n = means.len();
            let k = k.min(n);
            let mut ids: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = crate::exec::mix_seed(s, i as u64);
                ids.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let returned = &ids[..k];
            // Oracle: count how many arms beat each candidate threshold.
            let kth = |set: &[f64]| *set.iter().find(|&&x| set.iter().filter(|&&y| y > x).count() < k
                && set.iter().filter(|&&y| y >= x).count() >= k).unwrap();
            let all = kth(&means);
            let sub: Vec<f64> = returned.iter().map(|&i| means[i]).collect();
            let got = suboptimality(returned, &means, k).unwrap();
            prop_assert_eq!(got, all - kth(&sub));
            prop_assert!(got >= 0.0);
            let truth: Vec<usize> = {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
                order[..k].to_vec()
            };
            let p = precision(returned, &truth, k).unwrap();
            let hits = (0..n).filter(|i| returned.contains(i) && truth.contains(i)).count();
            prop_assert_eq!(p, hits as f64 / k as f64);
        }
    }
}
