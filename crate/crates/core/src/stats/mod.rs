//! Nonparametric comparison of feature values between assessment sets.

mod matrix;
mod ranks;
mod wilcoxon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use matrix::{build_matrix, compare_sets, rows_for, ComparisonMatrix, FeatureTable, MatrixCell, MatrixRow};
pub use wilcoxon::{signed_rank_null_counts, wilcoxon_rank_sum, wilcoxon_signed_rank, EXACT_MAX_N};

/// Significance level used throughout unless configured otherwise.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// First member of each pair (or first sample) tends to be larger.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestVariant {
    /// Paired test over subjects present in both sets.
    #[default]
    SignedRank,
    /// Unpaired test over all subjects present in either set.
    RankSum,
}

impl fmt::Display for TestVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestVariant::SignedRank => "signed-rank",
            TestVariant::RankSum => "rank-sum",
        })
    }
}

impl FromStr for TestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed-rank" => Ok(TestVariant::SignedRank),
            "rank-sum" => Ok(TestVariant::RankSum),
            _ => Err(Error::Value(format!("unknown test variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TestOptions {
    pub variant: TestVariant,
    pub alternative: Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `W` (positive rank sum) for the signed-rank test, `U` for rank-sum.
    pub statistic: f64,
    /// Pairs left after dropping zero differences, or the pooled sample
    /// size for rank-sum.
    pub n_effective: usize,
    pub p_value: f64,
    pub method: Method,
    pub ties_present: bool,
    pub zeros_dropped: usize,
    pub alternative: Alternative,
    /// Smallest p-value the exact test could produce at this sample size.
    pub min_attainable_p: f64,
}

/// Bonferroni adjustment `min(1, m * p)` for a family of `m` comparisons.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Range("comparison count must be at least 1".into()));
    }
    p_values
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((p * m as f64).min(1.0))
            } else {
                Err(Error::Range(format!("p-value {p} outside [0, 1]")))
            }
        })
        .collect()
}
