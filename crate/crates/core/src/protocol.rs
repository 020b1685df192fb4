//! Study protocol: set pairs, task taxonomy, jump and power formulas,
//! physiological sidecar records and recovery summaries.

use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{EntropyChannel, FeatureId, Statistic};
use crate::ink::{SetId, TaskCategory, TaskId};
use crate::stats::{ComparisonMatrix, MatrixRow, DEFAULT_ALPHA};

pub const STANDARD_GRAVITY: f64 = 9.81;

/// Two distinct sets, earlier first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SetPair(SetId, SetId);

impl SetPair {
    pub fn new(first: SetId, second: SetId) -> Result<Self> {
        if first < second {
            Ok(SetPair(first, second))
        } else {
            Err(Error::Value(format!(
                "set pair {first}-{second} must be in ascending order"
            )))
        }
    }

    pub fn first(&self) -> SetId {
        self.0
    }

    pub fn second(&self) -> SetId {
        self.1
    }
}

impl fmt::Display for SetPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl std::str::FromStr for SetPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| Error::Value(format!("set pair {s:?} must look like S1-S2")))?;
        SetPair::new(a.parse()?, b.parse()?)
    }
}

impl From<SetPair> for String {
    fn from(p: SetPair) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for SetPair {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// All ten ascending pairs of S1..S5, first set major.
pub fn canonical_set_pairs() -> Vec<SetPair> {
    let mut pairs = Vec::with_capacity(10);
    for (i, &a) in SetId::ALL.iter().enumerate() {
        for &b in &SetId::ALL[i + 1..] {
            pairs.push(SetPair(a, b));
        }
    }
    pairs
}

/// Parses a comma-separated pair list such as `S1-S2,S1-S4`.
pub fn parse_pairs(list: &str) -> Result<Vec<SetPair>> {
    let pairs = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<SetPair>>>()?;
    if pairs.is_empty() {
        return Err(Error::Value("empty set-pair list".into()));
    }
    Ok(pairs)
}

pub fn task_category(id: u8) -> Result<TaskCategory> {
    Ok(TaskId::new(id)?.category())
}

/// Jump height in meters from flight time: `h = g * t^2 / 8`.
pub fn jump_height(flight_time: f64, g: f64) -> Result<f64> {
    if !flight_time.is_finite() || flight_time < 0.0 {
        return Err(Error::Range(format!("flight time {flight_time} s")));
    }
    if !g.is_finite() {
        return Err(Error::Value(format!("gravity {g}")));
    }
    Ok(g * flight_time * flight_time / 8.0)
}

/// Mechanical power in watts: force times velocity.
pub fn power_output(force: f64, velocity: f64) -> Result<f64> {
    if !force.is_finite() || !velocity.is_finite() {
        return Err(Error::Value(format!("force {force} N, velocity {velocity} m/s")));
    }
    Ok(force * velocity)
}

/// Physiological and jump measurements taken with one set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuxRecord {
    /// Blood lactate, mmol/L.
    pub lactate: Option<f64>,
    /// Jump flight time, s.
    pub flight_time: Option<f64>,
    /// N.
    pub force: Option<f64>,
    /// m/s.
    pub velocity: Option<f64>,
    /// Perceived exertion on the 0-10 Borg scale.
    pub rpe: Option<f64>,
}

const AUX_COLUMNS: [&str; 5] = ["lactate", "flight_time", "force", "velocity", "rpe"];

impl AuxRecord {
    pub fn jump_height(&self, g: f64) -> Option<Result<f64>> {
        self.flight_time.map(|t| jump_height(t, g))
    }

    pub fn power(&self) -> Option<Result<f64>> {
        Some(power_output(self.force?, self.velocity?))
    }

    fn fields(&self) -> [Option<f64>; 5] {
        [self.lactate, self.flight_time, self.force, self.velocity, self.rpe]
    }

    /// Parses the two-line sidecar: a header naming the five columns and
    /// one row of values, `NA` for missing.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let fmt_err = |line, message: String| Error::Format { line, message };

        let (header_line, header) = lines.next().ok_or_else(|| fmt_err(1, "empty aux file".into()))?;
        let names: Vec<&str> = header.split_whitespace().collect();
        if names != AUX_COLUMNS {
            return Err(fmt_err(
                header_line,
                format!("aux header must be {}", AUX_COLUMNS.join(" ")),
            ));
        }
        let (line, row) = lines
            .next()
            .ok_or_else(|| fmt_err(header_line, "aux file has no value row".into()))?;
        if let Some((extra, _)) = lines.next() {
            return Err(fmt_err(extra, "aux file has more than one value row".into()));
        }
        let tokens: Vec<&str> = row.split_whitespace().collect();
        if tokens.len() != AUX_COLUMNS.len() {
            return Err(fmt_err(line, format!("expected 5 values, found {}", tokens.len())));
        }
        let mut values = [None; 5];
        for ((slot, token), name) in values.iter_mut().zip(&tokens).zip(AUX_COLUMNS) {
            if *token == "NA" {
                continue;
            }
            let v: f64 = token
                .parse()
                .map_err(|_| fmt_err(line, format!("{name} value {token:?} is not a number")))?;
            if !v.is_finite() || v < 0.0 || (name == "rpe" && v > 10.0) {
                return Err(fmt_err(line, format!("{name} value {v} out of range")));
            }
            *slot = Some(v);
        }
        let [lactate, flight_time, force, velocity, rpe] = values;
        Ok(AuxRecord {
            lactate,
            flight_time,
            force,
            velocity,
            rpe,
        })
    }

    pub fn to_tsv(&self) -> String {
        let row: Vec<String> = self
            .fields()
            .iter()
            .map(|v| v.map_or_else(|| "NA".to_string(), |v| v.to_string()))
            .collect();
        format!("{}\n{}\n", AUX_COLUMNS.join("\t"), row.join("\t"))
    }
}

/// Significant cells of one category in one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: TaskCategory,
    /// Matrix rows belonging to the category.
    pub rows: usize,
    pub significant: Vec<MatrixRow>,
}

impl CategoryCount {
    pub fn count(&self) -> usize {
        self.significant.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub pair: SetPair,
    pub categories: Vec<CategoryCount>,
}

impl ColumnSummary {
    pub fn count(&self, category: TaskCategory) -> usize {
        self.categories
            .iter()
            .find(|c| c.category == category)
            .map_or(0, CategoryCount::count)
    }

    pub fn total(&self) -> usize {
        self.categories.iter().map(CategoryCount::count).sum()
    }
}

/// Marks counts as covering only the rows present in the matrix.
pub const SUMMARY_SCOPE: &str = "catalog-subset";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub scope: String,
    pub alpha: f64,
    /// Columns comparing a later set with the S1 baseline, in set order.
    pub against_baseline: Vec<ColumnSummary>,
    /// The S4-S5 column, if present.
    pub no_recovery: Option<ColumnSummary>,
}

fn summarize_column(matrix: &ComparisonMatrix, column: usize, pair: SetPair, alpha: f64) -> ColumnSummary {
    let categories = TaskCategory::ALL
        .into_iter()
        .map(|category| {
            let in_category: Vec<usize> = (0..matrix.rows.len())
                .filter(|&r| matrix.rows[r].task.category() == category)
                .collect();
            CategoryCount {
                category,
                rows: in_category.len(),
                significant: in_category
                    .into_iter()
                    .filter(|&r| matrix.is_significant_at(r, column, alpha))
                    .map(|r| matrix.rows[r])
                    .collect(),
            }
        })
        .collect();
    ColumnSummary { pair, categories }
}

/// Counts cells with `p < alpha` per task category, for every column
/// against S1 and for S4-S5.
pub fn summarize_recovery(matrix: &ComparisonMatrix, alpha: f64) -> RecoverySummary {
    let column = |a, b| {
        let pair = SetPair(a, b);
        matrix.column(pair).map(|c| summarize_column(matrix, c, pair, alpha))
    };
    RecoverySummary {
        scope: SUMMARY_SCOPE.to_string(),
        alpha,
        against_baseline: SetId::ALL[1..].iter().filter_map(|&s| column(SetId::S1, s)).collect(),
        no_recovery: column(SetId::S4, SetId::S5),
    }
}

impl RecoverySummary {
    pub fn baseline_column(&self, later: SetId) -> Option<&ColumnSummary> {
        self.against_baseline.iter().find(|c| c.pair.second() == later)
    }

    /// Plain-text rendering: per-column counts, then the recovery reading
    /// for mechanical versus cognitive and fine-motor tasks.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Recovery summary ({}, alpha = {})", self.scope, self.alpha);
        let _ = writeln!(out, "Significant cells against the S1 baseline:");
        let line = |out: &mut String, col: &ColumnSummary| {
            let parts: Vec<String> = col
                .categories
                .iter()
                .map(|c| format!("{} {}/{}", c.category, c.count(), c.rows))
                .collect();
            let _ = writeln!(out, "  {:<6} {}", col.pair.to_string(), parts.join("  "));
        };
        for col in &self.against_baseline {
            line(&mut out, col);
        }
        let trend = |category: TaskCategory| -> Option<(usize, usize)> {
            Some((
                self.baseline_column(SetId::S4)?.count(category),
                self.baseline_column(SetId::S5)?.count(category),
            ))
        };
        if let Some((s4, s5)) = trend(TaskCategory::Mechanical) {
            let _ = writeln!(
                out,
                "- Mechanical tasks: {s4} significant cells at S1-S4, {s5} at S1-S5 ({})",
                if s5 < s4 { "fast recovery" } else { "no fast recovery" }
            );
        }
        if let (Some((c4, c5)), Some((f4, f5))) = (trend(TaskCategory::Cognitive), trend(TaskCategory::FineMotor)) {
            let (before, after) = (c4 + f4, c5 + f5);
            let _ = writeln!(
                out,
                "- Cognitive and fine motor tasks: {before} significant cells at S1-S4, {after} at S1-S5 ({})",
                if after >= before { "slow recovery" } else { "recovering" }
            );
        }
        if let Some(col) = &self.no_recovery {
            let _ = writeln!(
                out,
                "- S4-S5: {} significant cells{}",
                col.total(),
                if col.total() == 0 {
                    " (no change after the final rest)"
                } else {
                    ""
                }
            );
        }
        out
    }
}

/// Rows and p-values of the published comparison table, in its printed
/// order (cognitive, mechanical, then fine motor tasks).
pub fn published_table2() -> ComparisonMatrix {
    use FeatureId::*;
    let std_speed = Speed(Statistic::Std);
    let std_acc = Acceleration(Statistic::Std);
    let max_speed = Speed(Statistic::Max);
    let max_acc = Acceleration(Statistic::Max);
    let ddp = MeanAbsPressureSecondDerivative;
    #[rustfmt::skip]
    let data: [(u8, FeatureId, [f64; 10]); 29] = [
        (1, std_speed, [0.863, 0.421, 0.654, 0.328, 0.0412, 0.1074, 0.0098, 0.7717, 0.4605, 0.1994]),
        (1, std_acc, [0.84, 0.421, 0.579, 0.328, 0.0332, 0.0750, 0.0098, 0.7074, 0.3829, 0.1994]),
        (1, PressureBand(100, 600), [0.5, 0.199, 0.051, 0.107, 0.0985, 0.0236, 0.0750, 0.1858, 0.3829, 0.6359]),
        (1, ddp, [0.186, 0.244, 0.098, 0.014, 0.6543, 0.3641, 0.0750, 0.2926, 0.0370, 0.0620]),
        (1, max_speed, [0.579, 0.293, 0.383, 0.228, 0.0620, 0.1168, 0.0186, 0.6543, 0.3829, 0.2594]),
        (1, max_acc, [0.598, 0.31, 0.346, 0.244, 0.0620, 0.0985, 0.0164, 0.6171, 0.4020, 0.2594]),
        (1, NormalizedTimeUp, [0.117, 0.046, 0.011, 0.033, 0.1858, 0.1074, 0.1994, 0.4213, 0.6724, 0.7564]),
        (1, TimeInAir, [0.364, 0.117, 0.0458, 0.075, 0.3641, 0.1994, 0.2283, 0.2136, 0.2926, 0.6543]),
        (1, TimeDown, [0.31, 0.364, 0.276, 0.046, 0.6171, 0.3457, 0.0507, 0.4408, 0.0683, 0.0561]),
        (2, ddp, [0.364, 0.52, 0.051, 0.117, 0.3829, 0.0209, 0.0561, 0.0098, 0.0186, 0.6543]),
        (2, PressureAbove(100), [0.383, 0.402, 0.186, 0.041, 0.4802, 0.1487, 0.0412, 0.2136, 0.0507, 0.1858]),
        (2, PressureBand(100, 600), [0.48, 0.149, 0.082, 0.026, 0.2757, 0.1074, 0.0823, 0.1994, 0.1487, 0.5000]),
        (2, TimeInAir, [0.16, 0.149, 0.024, 0.009, 0.6902, 0.0620, 0.0236, 0.0901, 0.0412, 0.2594]),
        (2, TimeDown, [0.293, 0.383, 0.186, 0.019, 0.5198, 0.1375, 0.0209, 0.1605, 0.0412, 0.1994]),
        (2, NormalizedTimeUp, [0.117, 0.107, 0.013, 9e-4, 0.4408, 0.0823, 0.0209, 0.1605, 0.0236, 0.2926]),
        (6, Entropy(EntropyChannel::Y), [0.5, 0.024, 0.52, 0.075, 0.0370, 0.6171, 0.2136, 0.9814, 0.8271, 0.0901]),
        (6, TimeInAir, [0.0412, 0.011, 0.002, 0.002, 0.0750, 0.0750, 0.0458, 0.4605, 0.4213, 0.4213]),
        (8, NormalizedTimeUp, [0.149, 0.013, 0.01, 0.008, 0.1268, 0.0823, 0.0561, 0.5000, 0.4408, 0.5198]),
        (8, max_speed, [0.068, 0.026, 0.03, 0.117, 0.2283, 0.5000, 0.5980, 0.7406, 0.7864, 0.5592]),
        (3, std_speed, [0.098, 0.03, 0.037, 0.046, 0.2136, 0.5980, 0.5980, 0.8271, 0.7717, 0.5395]),
        (3, Entropy(EntropyChannel::X), [0.741, 0.46, 0.068, 0.672, 0.2136, 0.0332, 0.2136, 0.2926, 0.6724, 0.9668]),
        (3, PressureBand(100, 400), [0.293, 0.48, 0.056, 0.005, 0.5395, 0.1074, 0.0186, 0.0750, 0.0507, 0.3829]),
        (3, ddp, [0.0023, 0.107, 0.03, 0.004, 0.9380, 0.6359, 0.4408, 0.1487, 0.0750, 0.2436]),
        (5, TimeDown, [0.1729, 0.16, 0.062, 0.019, 0.3829, 0.2436, 0.0750, 0.3098, 0.1074, 0.2436]),
        (5, max_acc, [0.974, 0.383, 0.801, 0.772, 0.0412, 0.2757, 0.1168, 0.9317, 0.7564, 0.2757]),
        (9, PressureAbove(600), [0.364, 0.579, 0.068, 0.173, 0.7406, 0.0507, 0.1375, 0.0370, 0.0901, 0.6171]),
        (9, std_acc, [0.707, 0.098, 0.46, 0.346, 0.0458, 0.4605, 0.1375, 0.9099, 0.7074, 0.2594]),
        (9, ddp, [0.636, 0.137, 0.011, 0.046, 0.0901, 0.0332, 0.0370, 0.3098, 0.4408, 0.5000]),
        (9, TimeInAir, [0.186, 0.186, 0.0370, 0.008, 0.559, 0.214, 0.1074, 0.127, 0.068, 0.46]),
    ];
    let rows = data
        .iter()
        .map(|&(task, feature, _)| MatrixRow {
            task: TaskId::new(task).expect("published task ids are valid"),
            feature,
        })
        .collect();
    let values = data.iter().map(|(_, _, p)| p.to_vec()).collect();
    ComparisonMatrix::from_p_values(rows, canonical_set_pairs(), values, DEFAULT_ALPHA)
        .expect("published table is well formed")
}

/// Row specification of the published table, without its p-values.
pub fn table2_rows() -> Vec<MatrixRow> {
    published_table2().rows
}
