//! Wilcoxon signed-rank and rank-sum tests.

use super::ranks::{midranks, normal_sf, tie_term};
use super::{Alternative, Method, TestResult};
use crate::error::{Error, Result};

/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

/// Number of sign assignments giving each value of the signed-rank
/// statistic `W` for ranks `1..=n`. Index is `W`, length `n(n+1)/2 + 1`.
pub fn signed_rank_null_counts(n: usize) -> Vec<u64> {
    let total = n * (n + 1) / 2;
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for rank in 1..=n {
        reach += rank;
        // descending so each rank is used at most once
        for w in (rank..=reach).rev() {
            counts[w] += counts[w - rank];
        }
    }
    counts
}

/// Probability under the null of a statistic at least as extreme as `stat`
/// on a symmetric integer support `0..=max`, given the counts per value.
fn exact_tail(counts: &[u64], stat: usize, alternative: Alternative) -> f64 {
    let max = counts.len() - 1;
    let total: u64 = counts.iter().sum();
    let hits: u64 = match alternative {
        Alternative::Greater => counts[stat..].iter().sum(),
        Alternative::Less => counts[..=stat].iter().sum(),
        Alternative::TwoSided => {
            let far = stat.max(max - stat);
            counts
                .iter()
                .enumerate()
                .filter(|&(w, _)| w >= far || w <= max - far)
                .map(|(_, c)| c)
                .sum()
        }
    };
    hits as f64 / total as f64
}

const CONTINUITY: f64 = 0.5;

fn normal_tail(stat: f64, mean: f64, var: f64, alternative: Alternative) -> f64 {
    let sd = var.sqrt();
    let p = match alternative {
        Alternative::TwoSided => {
            let z = ((stat - mean).abs() - CONTINUITY).max(0.0) / sd;
            2.0 * normal_sf(z)
        }
        Alternative::Greater => normal_sf((stat - mean - CONTINUITY) / sd),
        Alternative::Less => normal_sf((mean - stat - CONTINUITY) / sd),
    };
    p.clamp(0.0, 1.0)
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    match values.into_iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Value(format!("non-finite value {v}"))),
        None => Ok(()),
    }
}

/// Paired Wilcoxon signed-rank test on `(a, b)` pairs, using `d = a - b`.
///
/// Zero differences are dropped. `W` is the rank sum of positive
/// differences, with midranks for tied magnitudes. Without ties and with at
/// most [`EXACT_MAX_N`] nonzero differences the p-value comes from the exact
/// null distribution; otherwise from the normal approximation with tie
/// correction and a 0.5 continuity correction.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)], alternative: Alternative) -> Result<TestResult> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_finite(pairs.iter().flat_map(|&(a, b)| [a, b]))?;

    let diffs: Vec<f64> = pairs.iter().map(|&(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    let zeros_dropped = pairs.len() - n;
    if n == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            n_effective: 0,
            p_value: 1.0,
            method: Method::Exact,
            ties_present: false,
            zeros_dropped,
            alternative,
            min_attainable_p: 1.0,
        });
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = midranks(&magnitudes);
    let w: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let ties_present = !ties.is_empty();
    let min_attainable_p = match alternative {
        Alternative::TwoSided => (2.0 / 2f64.powi(n as i32)).min(1.0),
        _ => 1.0 / 2f64.powi(n as i32),
    };

    let (p_value, method) = if !ties_present && n <= EXACT_MAX_N {
        let counts = signed_rank_null_counts(n);
        (exact_tail(&counts, w as usize, alternative), Method::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
        (normal_tail(w, mean, var, alternative), Method::NormalApprox)
    };

    Ok(TestResult {
        statistic: w,
        n_effective: n,
        p_value,
        method,
        ties_present,
        zeros_dropped,
        alternative,
        min_attainable_p,
    })
}

/// Number of size-`k` subsets of ranks `1..=total` with each rank sum,
/// shifted so index 0 is the smallest possible sum `k(k+1)/2`.
fn rank_sum_null_counts(k: usize, total: usize) -> Vec<u64> {
    let max_sum = k * (2 * total - k + 1) / 2;
    // dp[j][s]: subsets of size j with rank sum s
    let mut dp = vec![vec![0u64; max_sum + 1]; k + 1];
    dp[0][0] = 1;
    for rank in 1..=total {
        for j in (1..=k.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                dp[j][s] += dp[j - 1][s - rank];
            }
        }
    }
    let min_sum = k * (k + 1) / 2;
    dp[k][min_sum..].to_vec()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unpaired Wilcoxon rank-sum (Mann-Whitney) test of `first` against
/// `second`. The statistic is `U` of the first sample; `Greater` means the
/// first sample tends to be larger.
pub fn wilcoxon_rank_sum(first: &[f64], second: &[f64], alternative: Alternative) -> Result<TestResult> {
    if first.is_empty() || second.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_finite(first.iter().chain(second).copied())?;

    let (n1, n2) = (first.len(), second.len());
    let pooled: Vec<f64> = first.iter().chain(second).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let ties_present = !ties.is_empty();
    let arrangements = binomial(n1 + n2, n1);
    let min_attainable_p = match alternative {
        Alternative::TwoSided => (2.0 / arrangements).min(1.0),
        _ => 1.0 / arrangements,
    };

    let (p_value, method) = if !ties_present && n1 <= EXACT_MAX_N && n2 <= EXACT_MAX_N {
        let counts = rank_sum_null_counts(n1, n1 + n2);
        (exact_tail(&counts, u as usize, alternative), Method::Exact)
    } else {
        let (a, b) = (n1 as f64, n2 as f64);
        let n = a + b;
        let mean = a * b / 2.0;
        let var = a * b / 12.0 * ((n + 1.0) - tie_term(&ties) / (n * (n - 1.0)));
        if var <= 0.0 {
            // every value tied
            (1.0, Method::NormalApprox)
        } else {
            (normal_tail(u, mean, var, alternative), Method::NormalApprox)
        }
    };

    Ok(TestResult {
        statistic: u,
        n_effective: n1 + n2,
        p_value,
        method,
        ties_present,
        zeros_dropped: 0,
        alternative,
        min_attainable_p,
    })
}
