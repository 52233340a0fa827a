//! Concentration machinery: pair-form sample variance, empirical Bernstein
//! bounds for plain and importance-weighted losses, and binomial tail
//! inversion.
//!
//! Sums are Neumaier-compensated so that streaming accumulation is
//! order-deterministic and the weighted/unweighted scaling identity holds to
//! better than 1e-12 even for weight caps of 100.

use crate::error::{Error, Result};
use crate::special::ln_binomial;
use serde::{Deserialize, Serialize};

/// Empirical summary backing a certification bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    /// Empirical mean of the (possibly weighted) losses.
    pub mean: f64,
    /// Pair-form sample variance (equals the unbiased sample variance).
    pub variance: f64,
    /// Weight cap context; 1 for unweighted data.
    pub max_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    EmpiricalBernstein,
    WeightedBernstein,
    BinomialInversion,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundKind::EmpiricalBernstein => write!(f, "empirical-bernstein"),
            BoundKind::WeightedBernstein => write!(f, "weighted-bernstein"),
            BoundKind::BinomialInversion => write!(f, "binomial-inversion"),
        }
    }
}

/// A certification record: with probability at least `1 - beta` over the `n`
/// samples, the true failure probability is at most `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertBound {
    pub epsilon: f64,
    pub beta: f64,
    pub n: usize,
    pub kind: BoundKind,
    pub stats: SampleStats,
}

/// Compensated (Neumaier) summation; deterministic for a fixed input order.
pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "sample vector".into(),
        });
    }
    Ok(())
}

/// Pair-form sample variance `(1/(N(N-1))) sum_{i<=j} (x_i - x_j)^2`,
/// computed through its algebraic identity with the unbiased sample
/// variance (two-pass, compensated).
pub fn pair_variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: xs.len() as f64,
            reason: "pair variance needs at least two samples",
        });
    }
    check_finite(xs)?;
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let ss = compensated_sum(xs.iter().map(|&x| {
        let d = x - mean;
        d * d
    }));
    Ok((ss / (n - 1.0)).max(0.0))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "confidence parameter must lie in (0,1)",
        });
    }
    Ok(())
}

/// Empirical Bernstein upper confidence bound for i.i.d. data in `[0,1]`:
///
/// `epsilon = mean + sqrt(2 V ln(2/beta) / N) + 7 ln(2/beta) / (3(N-1))`.
pub fn empirical_bernstein(xs: &[f64], beta: f64) -> Result<CertBound> {
    check_beta(beta)?;
    check_finite(xs)?;
    if xs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: xs.len() as f64,
            reason: "bound needs at least two samples",
        });
    }
    if xs.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidParameter {
            name: "xs",
            value: f64::NAN,
            reason: "samples must lie in [0,1]",
        });
    }
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let variance = pair_variance(xs)?;
    let log_term = (2.0 / beta).ln();
    let epsilon = mean + (2.0 * variance * log_term / n).sqrt() + 7.0 * log_term / (3.0 * (n - 1.0));
    Ok(CertBound {
        epsilon,
        beta,
        n: xs.len(),
        kind: BoundKind::EmpiricalBernstein,
        stats: SampleStats {
            n: xs.len(),
            mean,
            variance,
            max_weight: 1.0,
        },
    })
}

/// Empirical Bernstein bound for importance-weighted losses in
/// `[0, w_max]`:
///
/// `epsilon = Zbar + sqrt(2 V_Z ln(2/beta) / N) + 7 ln(2/beta) W_max / (3(N-1))`.
///
/// Equals `w_max * empirical_bernstein(zs / w_max, beta)` by the scaling
/// argument, but is computed directly from the unscaled data.
pub fn weighted_pac_bound(zs: &[f64], w_max: f64, beta: f64) -> Result<CertBound> {
    check_beta(beta)?;
    check_finite(zs)?;
    if zs.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: zs.len() as f64,
            reason: "bound needs at least two samples",
        });
    }
    if !(w_max >= 1.0 && w_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "w_max",
            value: w_max,
            reason: "weight cap must be finite and >= 1",
        });
    }
    for &z in zs {
        if z < 0.0 || z > w_max {
            return Err(Error::WeightBound {
                weight: z,
                bound: w_max,
                theta: Vec::new(),
            });
        }
    }
    let n = zs.len() as f64;
    let mean = compensated_sum(zs.iter().copied()) / n;
    let variance = pair_variance(zs)?;
    let log_term = (2.0 / beta).ln();
    let epsilon = mean
        + (2.0 * variance * log_term / n).sqrt()
        + 7.0 * log_term * w_max / (3.0 * (n - 1.0));
    Ok(CertBound {
        epsilon,
        beta,
        n: zs.len(),
        kind: BoundKind::WeightedBernstein,
        stats: SampleStats {
            n: zs.len(),
            mean,
            variance,
            max_weight: w_max,
        },
    })
}

/// `Bin(k, m, e) = sum_{j<=k} C(m,j) e^j (1-e)^(m-j)`, evaluated in log
/// space term by term, summing downward from `j = k` with early cut-off once
/// terms are negligible past the distribution mode.
pub fn binomial_cdf(k: u64, m: u64, e: f64) -> f64 {
    assert!(k <= m && m >= 1);
    if e <= 0.0 {
        return 1.0;
    }
    if e >= 1.0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    if k == m {
        return 1.0;
    }
    let ln_e = e.ln();
    let ln_1me = (-e).ln_1p();
    let mut log_term = ln_binomial(m, k) + k as f64 * ln_e + (m - k) as f64 * ln_1me;
    let mode = (m as f64 + 1.0) * e;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut j = k;
    loop {
        let term = log_term.exp();
        let t = sum + term;
        if sum.abs() >= term {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if j == 0 {
            break;
        }
        // Below the mode the terms decay geometrically; stop once negligible.
        if (j as f64) < mode && term < sum * 1e-18 {
            break;
        }
        // t_{j-1} / t_j = j (1-e) / ((m-j+1) e)
        log_term += (j as f64).ln() + ln_1me - ((m - j + 1) as f64).ln() - ln_e;
        j -= 1;
    }
    (sum + comp).min(1.0)
}

/// Largest failure rate `e` consistent with observing `k` failures in `m`
/// Bernoulli trials at confidence level `beta`:
///
/// `max { e : Bin(k, m, e) >= beta }`, found by bisection (the CDF is
/// nonincreasing in `e`).
pub fn binomial_tail_inversion(k: u64, m: u64, beta: f64) -> Result<f64> {
    if m < 1 || k > m {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k as f64,
            reason: "need 0 <= k <= m with m >= 1",
        });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "confidence parameter must lie in (0,1]",
        });
    }
    if k == m {
        return Ok(1.0);
    }
    let mut lo = 0.0f64; // Bin(k, m, lo) = 1 >= beta
    let mut hi = 1.0f64; // Bin(k, m, hi) = 0 < beta for k < m
    for _ in 0..200 {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(k, m, mid) >= beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Convenience: binomial-inversion bound packaged as a `CertBound`.
pub fn binomial_bound(k: u64, m: u64, beta: f64) -> Result<CertBound> {
    let epsilon = binomial_tail_inversion(k, m, beta)?;
    let mean = k as f64 / m as f64;
    // Pair variance of a 0/1 vector with k ones has the closed form
    // k (m-k) / (m (m-1)).
    let variance = if m > 1 {
        (k as f64) * ((m - k) as f64) / ((m as f64) * (m as f64 - 1.0))
    } else {
        0.0
    };
    Ok(CertBound {
        epsilon,
        beta,
        n: m as usize,
        kind: BoundKind::BinomialInversion,
        stats: SampleStats {
            n: m as usize,
            mean,
            variance,
            max_weight: 1.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Literal O(N^2) pair sum, the independent oracle for `pair_variance`.
    fn pair_variance_oracle(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mut acc = 0.0;
        for i in 0..xs.len() {
            for j in i..xs.len() {
                let d = xs[i] - xs[j];
                acc += d * d;
            }
        }
        acc / (n * (n - 1.0))
    }

    /// Textbook unbiased variance, a second independent route.
    fn textbook_variance(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        xs.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn pair_variance_constant_is_zero() {
        assert_eq!(pair_variance(&[0.7; 9]).unwrap(), 0.0);
    }

    #[test]
    fn pair_variance_single_pair() {
        assert!((pair_variance(&[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn pair_variance_matches_both_oracles() {
        let xs = [0.1, 0.4, 0.7, 0.9];
        let v = pair_variance(&xs).unwrap();
        assert!((v - textbook_variance(&xs)).abs() < 1e-14);
        assert!((v - pair_variance_oracle(&xs)).abs() < 1e-14);

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(2..400);
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let v = pair_variance(&xs).unwrap();
            let o = pair_variance_oracle(&xs);
            assert!((v - o).abs() <= 1e-12 * o.max(1.0), "{v} vs {o}");
        }
    }

    #[test]
    fn pair_variance_rejects_degenerate_input() {
        assert!(pair_variance(&[1.0]).is_err());
        assert!(pair_variance(&[]).is_err());
        assert!(pair_variance(&[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn bernstein_zero_variance_collapses_first_slack() {
        // ln(2/beta) = 2  =>  beta = 2 e^-2; slack = 7*2/(3*7) = 2/3.
        let beta = 2.0 * (-2.0f64).exp();
        let xs = [0.25; 8];
        let b = empirical_bernstein(&xs, beta).unwrap();
        assert!((b.epsilon - (0.25 + 2.0 / 3.0)).abs() < 1e-14);
        assert_eq!(b.stats.variance, 0.0);
    }

    #[test]
    fn bernstein_slack_vanishes_in_n() {
        let beta = 0.05;
        let mut prev = f64::INFINITY;
        for n in [4usize, 16, 64, 256, 1024, 4096] {
            let xs: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
            let b = empirical_bernstein(&xs, beta).unwrap();
            let slack = b.epsilon - b.stats.mean;
            assert!(slack < prev, "slack must shrink with n");
            prev = slack;
        }
        assert!(prev < 0.06);
    }

    #[test]
    fn bernstein_matches_independent_arithmetic() {
        // Alternating 0/1, N = 100, beta = 0.05, re-evaluated from scratch.
        let xs: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let b = empirical_bernstein(&xs, 0.05).unwrap();
        let n = 100.0f64;
        let mean = 0.5;
        let var = textbook_variance(&xs);
        let l = (2.0f64 / 0.05).ln();
        let expected = mean + (2.0 * var * l / n).sqrt() + 7.0 * l / (3.0 * (n - 1.0));
        assert!((b.epsilon - expected).abs() < 1e-12);
    }

    #[test]
    fn bernstein_rejects_bad_inputs() {
        assert!(empirical_bernstein(&[0.5], 0.05).is_err());
        assert!(empirical_bernstein(&[0.5, 1.5], 0.05).is_err());
        assert!(empirical_bernstein(&[0.5, -0.1], 0.05).is_err());
        assert!(empirical_bernstein(&[0.5, 0.5], 0.0).is_err());
        assert!(empirical_bernstein(&[0.5, 0.5], 1.0).is_err());
    }

    #[test]
    fn weighted_equals_unweighted_at_cap_one() {
        let zs = [0.0, 1.0, 0.5, 0.25, 1.0, 0.0];
        let w = weighted_pac_bound(&zs, 1.0, 0.1).unwrap();
        let u = empirical_bernstein(&zs, 0.1).unwrap();
        assert_eq!(w.epsilon, u.epsilon);
    }

    #[test]
    fn weighted_zero_losses_leave_only_cap_term() {
        let zs = vec![0.0; 100];
        let w_max = 3.0;
        let b = weighted_pac_bound(&zs, w_max, 0.05).unwrap();
        let expected = 7.0 * (40.0f64).ln() * w_max / 297.0;
        assert!((b.epsilon - expected).abs() < 1e-15);
    }

    #[test]
    fn weighted_rejects_cap_violation() {
        let zs = [0.0, 2.5];
        assert!(matches!(
            weighted_pac_bound(&zs, 2.0, 0.05),
            Err(Error::WeightBound { .. })
        ));
        assert!(weighted_pac_bound(&zs, 0.5, 0.05).is_err());
    }

    #[test]
    fn slack_monotone_in_variance_and_confidence() {
        // eps - mean nondecreasing in variance and in ln(2/beta).
        let lo_var: Vec<f64> = (0..100).map(|i| 0.5 + 0.01 * ((i % 2) as f64)).collect();
        let hi_var: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let a = empirical_bernstein(&lo_var, 0.05).unwrap();
        let b = empirical_bernstein(&hi_var, 0.05).unwrap();
        assert!(b.epsilon - b.stats.mean >= a.epsilon - a.stats.mean);

        let c = empirical_bernstein(&hi_var, 0.01).unwrap();
        assert!(c.epsilon - c.stats.mean >= b.epsilon - b.stats.mean);
    }

    #[test]
    fn inversion_trivial_cases() {
        assert_eq!(binomial_tail_inversion(5, 5, 0.3).unwrap(), 1.0);
        let e = binomial_tail_inversion(0, 1, 0.5).unwrap();
        assert!((e - 0.5).abs() < 1e-12);
        // beta = 1: only e = 0 keeps the CDF at 1 for k < m.
        assert!(binomial_tail_inversion(0, 10, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn inversion_matches_closed_form_at_zero_failures() {
        for &m in &[1u64, 10, 100, 1_000, 10_000, 100_000, 1_000_000] {
            for &beta in &[0.5, 0.05, 1e-6] {
                let e = binomial_tail_inversion(0, m, beta).unwrap();
                let exact = 1.0 - beta.powf(1.0 / m as f64);
                assert!(
                    (e - exact).abs() < 1e-10,
                    "m={m} beta={beta}: {e} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn inversion_monotonicities() {
        // Nondecreasing in k, nonincreasing in m, nonincreasing in beta.
        let base = binomial_tail_inversion(3, 100, 0.05).unwrap();
        assert!(binomial_tail_inversion(4, 100, 0.05).unwrap() >= base);
        assert!(binomial_tail_inversion(3, 200, 0.05).unwrap() <= base);
        assert!(binomial_tail_inversion(3, 100, 0.2).unwrap() <= base);
        assert!(binomial_tail_inversion(3, 100, 0.01).unwrap() >= base);
    }

    #[test]
    fn inversion_cdf_consistency() {
        for &(k, m) in &[(0u64, 10u64), (2, 50), (17, 300), (0, 1_000_000), (40, 100_000)] {
            for &beta in &[0.5, 0.05, 1e-6] {
                let e = binomial_tail_inversion(k, m, beta).unwrap();
                let cdf = binomial_cdf(k, m, e);
                assert!(
                    cdf >= beta && cdf <= beta + 1e-9,
                    "k={k} m={m} beta={beta}: cdf={cdf}"
                );
            }
        }
    }

    #[test]
    fn inversion_handles_huge_m() {
        // Accuracy limited by the bisection width, not the CDF evaluation.
        let e = binomial_tail_inversion(0, 100_000_000, 0.5).unwrap();
        let exact = 1.0 - 0.5f64.powf(1e-8);
        assert!((e - exact).abs() < 2e-15, "{e} vs {exact}");
    }

    #[test]
    fn inversion_rejects_bad_arguments() {
        assert!(binomial_tail_inversion(2, 1, 0.5).is_err());
        assert!(binomial_tail_inversion(0, 0, 0.5).is_err());
        assert!(binomial_tail_inversion(0, 5, 0.0).is_err());
        assert!(binomial_tail_inversion(0, 5, 1.1).is_err());
    }

    #[test]
    fn bernoulli_coverage_statistical() {
        // Bernoulli(0.1), N = 500, beta = 0.05: over 2000 trials the bound
        // may undershoot the truth in at most a 0.05 + 0.02 fraction.
        let p = 0.1;
        let n = 500;
        let trials = 2000;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mut violations = 0usize;
        for _ in 0..trials {
            let xs: Vec<f64> = (0..n)
                .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect();
            if empirical_bernstein(&xs, 0.05).unwrap().epsilon < p {
                violations += 1;
            }
        }
        let rate = violations as f64 / trials as f64;
        assert!(rate <= 0.07, "violation rate {rate}");
    }

    proptest! {
        #[test]
        fn scaling_identity(
            seed in 0u64..1_000_000,
            w in 1.0f64..100.0,
            n in 2usize..400,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let zs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * w).collect();
            let beta = 0.01 + 0.98 * rng.random::<f64>();
            let direct = weighted_pac_bound(&zs, w, beta).unwrap().epsilon;
            let scaled_data: Vec<f64> = zs.iter().map(|&z| z / w).collect();
            let scaled = w * empirical_bernstein(&scaled_data, beta).unwrap().epsilon;
            prop_assert!((direct - scaled).abs() < 1e-12, "{} vs {}", direct, scaled);
        }

        #[test]
        fn pair_variance_nonnegative_and_matches_oracle(
            raw in proptest::collection::vec(-100.0f64..100.0, 2..60)
        ) {
            let v = pair_variance(&raw).unwrap();
            prop_assert!(v >= 0.0);
            let o = pair_variance_oracle(&raw);
            prop_assert!((v - o).abs() <= 1e-10 * o.max(1.0));
        }
    }
}
