//! Sample sizes for estimating the mean of a finite list sampled without
//! replacement, and the per-round schedule of the median elimination loop.

use crate::error::{Error, Result};

/// Without-replacement variance factor for `m` draws from a list of length `n`:
/// `min{1 - (m-1)/n, (1 - m/n)(1 + 1/m)}`.
pub fn rho(m: usize, n: usize) -> Result<f64> {
    if n <= 1 {
        return Err(Error::Domain(format!("list length must exceed 1, got {n}")));
    }
    if m == 0 || m > n {
        return Err(Error::Domain(format!("pull count {m} outside [1, {n}]")));
    }
    let (m, n) = (m as f64, n as f64);
    let first = 1.0 - (m - 1.0) / n;
    let second = (1.0 - m / n) * (1.0 + 1.0 / m);
    Ok(first.min(second))
}

/// Closed-form number of draws without replacement that suffices for the
/// one-sided deviation bound with confidence parameter `u`:
///
/// `m(u) = min{(u + 1) / (1 + u/n), (u + u/n) / (1 + u/n)}`.
///
/// The result lies in `[0, n]` and is non-decreasing in `u`. An infinite `u`
/// (zero tolerance) maps to `n`.
pub fn sample_size(u: f64, n: usize) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(Error::Domain(format!("u must be non-negative, got {u}")));
    }
    if n <= 1 {
        return Err(Error::Domain(format!("list length must exceed 1, got {n}")));
    }
    let len = n as f64;
    if u.is_infinite() {
        return Ok(len);
    }
    let ratio = u / len;
    let relaxed = (u + 1.0) / (1.0 + ratio);
    let linear = (u + ratio) / (1.0 + ratio);
    Ok(relaxed.min(linear).clamp(0.0, len))
}

/// Integer pull count for a real sample size: `ceil(m)` clamped to `[0, n]`.
pub fn pull_target(m: f64, n: usize) -> usize {
    let up = m.ceil();
    if up <= 0.0 {
        0
    } else if up >= n as f64 {
        n
    } else {
        up as usize
    }
}

/// `u = ln(1/delta) / 2 * width^2 / epsilon^2`.
pub fn confidence_to_u(epsilon: f64, delta: f64, range_width: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(range_width > 0.0) {
        return Err(Error::Domain(format!(
            "range width must be positive, got {range_width}"
        )));
    }
    Ok((1.0 / delta).ln() / 2.0 * range_width * range_width / (epsilon * epsilon))
}

/// Tolerance and failure budget of round `round` (1-based):
/// `epsilon/4 * (3/4)^(round-1)` and `delta / 2^round`.
pub fn elimination_schedule(epsilon: f64, delta: f64, round: u32) -> Result<(f64, f64)> {
    if round == 0 {
        return Err(Error::Domain("rounds are numbered from 1".into()));
    }
    let eps = epsilon / 4.0 * 0.75f64.powi(round as i32 - 1);
    let del = delta / 2f64.powi(round as i32);
    Ok((eps, del))
}

/// Argument of the logarithm in the round target:
/// `2 * excess / (delta_l * (floor(excess/2) + 1))` with `excess = |S_l| - K`.
pub fn round_log_argument(excess: usize, delta_l: f64) -> f64 {
    2.0 * excess as f64 / (delta_l * ((excess / 2) as f64 + 1.0))
}

/// Confidence parameter of round `l`: `(2 * width^2 / epsilon_l^2) * ln(arg)`.
pub fn round_u(excess: usize, epsilon_l: f64, delta_l: f64, range_width: f64) -> f64 {
    2.0 * range_width * range_width / (epsilon_l * epsilon_l)
        * round_log_argument(excess, delta_l).ln()
}

/// Cumulative number of pulls every survivor must have received by the end
/// of a round, before the monotonicity clamp applied by the caller.
///
/// A zero `epsilon_l` asks for exact means and returns `n`.
pub fn round_pull_target(
    surviving: usize,
    k: usize,
    epsilon_l: f64,
    delta_l: f64,
    range_width: f64,
    n: usize,
) -> Result<usize> {
    if surviving <= k {
        return Err(Error::Precondition(format!(
            "round needs more than K={k} survivors, got {surviving}"
        )));
    }
    if epsilon_l == 0.0 || n <= 1 {
        return Ok(n);
    }
    if !(epsilon_l > 0.0) || !(delta_l > 0.0 && delta_l < 1.0) || !(range_width > 0.0) {
        return Err(Error::Domain(format!(
            "bad round parameters epsilon={epsilon_l} delta={delta_l} width={range_width}"
        )));
    }
    let u = round_u(surviving - k, epsilon_l, delta_l, range_width);
    let u = if u.is_nan() { f64::INFINITY } else { u };
    Ok(pull_target(sample_size(u, n)?, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest m in 1..=n with m / rho_m >= u. At m = n, rho_n = 0 and the
    /// inequality holds vacuously.
    fn brute_force_min_pulls(u: f64, n: usize) -> usize {
        for m in 1..n {
            let first = 1.0 - (m as f64 - 1.0) / n as f64;
            let second = (1.0 - m as f64 / n as f64) * (1.0 + 1.0 / m as f64);
            if m as f64 / first.min(second) >= u {
                return m;
            }
        }
        n
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1, 100).unwrap(), 1.0);
        assert_eq!(rho(100, 100).unwrap(), 0.0);
        assert!((rho(33, 100).unwrap() - 0.68).abs() < 1e-12);
        assert!(matches!(rho(0, 100), Err(Error::Domain(_))));
        assert!(matches!(rho(101, 100), Err(Error::Domain(_))));
        assert!(rho(1, 1).is_err());
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size(0.0, 7).unwrap(), 0.0);
        assert_eq!(sample_size(0.0, 100_000).unwrap(), 0.0);

        let m = sample_size(1.0, 10).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        assert_eq!(pull_target(m, 10), 1);
        assert_eq!(brute_force_min_pulls(1.0, 10), 1);

        let m = sample_size(50.0, 100).unwrap();
        assert!((m - 50.5 / 1.5).abs() < 1e-12);
        assert_eq!(pull_target(m, 100), 34);
        assert_eq!(brute_force_min_pulls(50.0, 100), 34);

        assert_eq!(sample_size(f64::INFINITY, 42).unwrap(), 42.0);
        assert!(matches!(sample_size(-1e-9, 10), Err(Error::Domain(_))));
        assert!(sample_size(f64::NAN, 10).is_err());
    }

    #[test]
    fn confidence_examples() {
        let e = std::f64::consts::E;
        assert!((confidence_to_u(1.0, 1.0 / e, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((confidence_to_u(0.5, 1.0 / e, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let u = confidence_to_u(0.1, 0.05, 1.0).unwrap();
        assert!((u - 20f64.ln() / 2.0 / 0.01).abs() < 1e-9);
        assert!((u - 149.787).abs() < 1e-3);
        assert!(confidence_to_u(0.0, 0.1, 1.0).is_err());
        assert!(confidence_to_u(0.1, 0.1, 0.0).is_err());
        assert!(confidence_to_u(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(elimination_schedule(0.4, 0.2, 1).unwrap(), (0.1, 0.1));
        let (e, d) = elimination_schedule(0.4, 0.2, 2).unwrap();
        assert!((e - 0.075).abs() < 1e-15);
        assert!((d - 0.05).abs() < 1e-15);
        assert!(elimination_schedule(0.4, 0.2, 0).is_err());

        let (mut se, mut sd) = (0.0, 0.0);
        for l in 1..=30 {
            let (e, d) = elimination_schedule(0.4, 0.2, l).unwrap();
            se += e;
            sd += d;
            assert!(se <= 0.4 + 1e-15 && sd <= 0.2 + 1e-15);
        }
    }

    #[test]
    fn round_target_examples() {
        assert_eq!(round_log_argument(1, 0.05), 2.0 / 0.05);
        for n in [2usize, 10, 1000] {
            for s in 2..20 {
                assert!(round_pull_target(s, 1, 1e-3, 0.01, 3.0, n).unwrap() <= n);
            }
        }
        // |S|=16, K=1, eps_l=0.1, delta_l=0.05, width=1, N=1e5.
        let u = 200.0 * (2.0f64 * 15.0 / (0.05 * 8.0)).ln();
        assert!((round_u(15, 0.1, 0.05, 1.0) - u).abs() < 1e-9);
        let t = round_pull_target(16, 1, 0.1, 0.05, 1.0, 100_000).unwrap();
        let oracle = brute_force_min_pulls(u, 100_000);
        assert_eq!(oracle, 857);
        assert!(oracle <= t && t <= oracle + 1, "t={t} oracle={oracle}");
        assert!(matches!(
            round_pull_target(3, 3, 0.1, 0.1, 1.0, 10),
            Err(Error::Precondition(_))
        ));
        assert_eq!(round_pull_target(5, 1, 0.0, 0.1, 1.0, 77).unwrap(), 77);
    }

    proptest! {
        #[test]
        fn sample_size_bounded_and_monotone(n in 2usize..100_000, u in 0.0f64..1e7, du in 0.0f64..1e4) {
            let a = sample_size(u, n).unwrap();
            let b = sample_size(u + du, n).unwrap();
            prop_assert!((0.0..=n as f64).contains(&a));
            prop_assert!(a <= b + 1e-9 * b.max(1.0));
        }

        #[test]
        fn closed_form_tracks_brute_force(n in 2usize..2000, frac in 0.0f64..10.0) {
            let u = frac * n as f64;
            let m_star = brute_force_min_pulls(u, n);
            let t = pull_target(sample_size(u, n).unwrap(), n).max(1);
            prop_assert!(m_star <= t && t <= m_star + 1, "u={} n={} m*={} t={}", u, n, m_star, t);
        }
    }
}
