use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wilcoxon_rank_sum, wilcoxon_signed_rank, Method, TestOptions, TestResult, TestVariant};
use crate::error::{Error, Result};
use crate::features::{extract_features, Catalog, FeatureId, FeatureVector};
use crate::ink::{CellKey, SetId, StudyCorpus, TaskId};
use crate::protocol::SetPair;

/// Feature vectors of a whole corpus, keyed by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    catalog: Catalog,
    vectors: BTreeMap<CellKey, FeatureVector>,
    failures: BTreeMap<CellKey, String>,
}

impl FeatureTable {
    pub fn new(catalog: Catalog) -> Self {
        FeatureTable {
            catalog,
            vectors: BTreeMap::new(),
            failures: BTreeMap::new(),
        }
    }

    /// Extracts features for every record. Records that fail extraction are
    /// kept as failures and contribute no values.
    pub fn from_corpus(corpus: &StudyCorpus, catalog: &Catalog) -> Self {
        let records: Vec<_> = corpus.records().collect();
        let extracted: Vec<_> = records
            .par_iter()
            .map(|r| (r.key(), extract_features(r, catalog)))
            .collect();
        let mut table = FeatureTable::new(catalog.clone());
        for (key, result) in extracted {
            match result {
                Ok(v) => {
                    table.vectors.insert(key, v);
                }
                Err(e) => {
                    table.failures.insert(key, e.to_string());
                }
            }
        }
        table
    }

    pub fn insert(&mut self, key: CellKey, vector: FeatureVector) {
        self.failures.remove(&key);
        self.vectors.insert(key, vector);
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn vectors(&self) -> impl Iterator<Item = (&CellKey, &FeatureVector)> {
        self.vectors.iter()
    }

    pub fn failures(&self) -> impl Iterator<Item = (&CellKey, &str)> {
        self.failures.iter().map(|(k, e)| (k, e.as_str()))
    }

    /// Every cell seen, extracted or failed, in (subject, set, task) order.
    pub fn keys(&self) -> Vec<&CellKey> {
        let keys: BTreeSet<&CellKey> = self.vectors.keys().chain(self.failures.keys()).collect();
        keys.into_iter().collect()
    }

    pub fn get(&self, key: &CellKey) -> Option<&FeatureVector> {
        self.vectors.get(key)
    }

    pub fn value(&self, subject: &str, set: SetId, task: TaskId, feature: FeatureId) -> Option<f64> {
        self.vectors
            .get(&CellKey {
                subject: subject.to_string(),
                set,
                task,
            })
            .and_then(|v| v.get(feature))
    }

    pub fn subjects(&self) -> BTreeSet<&str> {
        self.vectors.keys().map(|k| k.subject.as_str()).collect()
    }
}

/// Runs the configured Wilcoxon test for one (task, feature) between the
/// two sets of `pair`. The paired test only uses subjects with a value in
/// both sets.
pub fn compare_sets(
    table: &FeatureTable,
    task: TaskId,
    feature: FeatureId,
    pair: SetPair,
    options: TestOptions,
) -> Result<TestResult> {
    if !table.catalog.contains(feature) {
        return Err(Error::Value(format!("feature {feature} was not extracted")));
    }
    let subjects = table.subjects();
    let values = |set| -> Vec<Option<f64>> { subjects.iter().map(|s| table.value(s, set, task, feature)).collect() };
    let (first, second) = (values(pair.first()), values(pair.second()));
    let insufficient = || Error::InsufficientData(format!("task {task}, {feature}, {pair}: no subject has both sets"));
    match options.variant {
        TestVariant::SignedRank => {
            let pairs: Vec<(f64, f64)> = first
                .iter()
                .zip(&second)
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            if pairs.is_empty() {
                return Err(insufficient());
            }
            wilcoxon_signed_rank(&pairs, options.alternative)
        }
        TestVariant::RankSum => {
            let a: Vec<f64> = first.into_iter().flatten().collect();
            let b: Vec<f64> = second.into_iter().flatten().collect();
            if a.is_empty() || b.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "task {task}, {feature}, {pair}: a set has no values"
                )));
            }
            wilcoxon_rank_sum(&a, &b, options.alternative)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub task: TaskId,
    pub feature: FeatureId,
}

/// Rows for every task in `tasks` and every catalog feature, task-major.
pub fn rows_for(tasks: impl IntoIterator<Item = TaskId>, catalog: &Catalog) -> Vec<MatrixRow> {
    let tasks: BTreeSet<TaskId> = tasks.into_iter().collect();
    tasks
        .into_iter()
        .flat_map(|task| {
            catalog
                .features()
                .iter()
                .map(move |&feature| MatrixRow { task, feature })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    /// `None` when there was not enough data to test.
    pub p_value: Option<f64>,
    pub n_effective: Option<usize>,
    pub method: Option<Method>,
    /// The test could not reach significance at this sample size.
    pub low_n: bool,
}

impl MatrixCell {
    pub fn insufficient() -> Self {
        MatrixCell {
            p_value: None,
            n_effective: None,
            method: None,
            low_n: true,
        }
    }

    pub fn published(p: f64) -> Self {
        MatrixCell {
            p_value: Some(p),
            n_effective: None,
            method: None,
            low_n: false,
        }
    }
}

/// p-values indexed by (task, feature) rows and set-pair columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub rows: Vec<MatrixRow>,
    pub pairs: Vec<SetPair>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<MatrixCell>>,
    pub alpha: f64,
}

impl ComparisonMatrix {
    /// Wraps already computed p-values, e.g. published ones.
    pub fn from_p_values(rows: Vec<MatrixRow>, pairs: Vec<SetPair>, values: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        if values.len() != rows.len() {
            return Err(Error::Shape {
                left: rows.len(),
                right: values.len(),
            });
        }
        let mut cells = Vec::with_capacity(rows.len());
        for row in values {
            if row.len() != pairs.len() {
                return Err(Error::Shape {
                    left: pairs.len(),
                    right: row.len(),
                });
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Range(format!("p-value {p} outside [0, 1]")));
            }
            cells.push(row.into_iter().map(MatrixCell::published).collect());
        }
        Ok(ComparisonMatrix {
            rows,
            pairs,
            cells,
            alpha,
        })
    }

    pub fn cell(&self, row: usize, column: usize) -> &MatrixCell {
        &self.cells[row][column]
    }

    pub fn column(&self, pair: SetPair) -> Option<usize> {
        self.pairs.iter().position(|p| *p == pair)
    }

    pub fn row(&self, task: TaskId, feature: FeatureId) -> Option<usize> {
        self.rows.iter().position(|r| r.task == task && r.feature == feature)
    }

    pub fn is_significant_at(&self, row: usize, column: usize, alpha: f64) -> bool {
        self.cells[row][column].p_value.is_some_and(|p| p < alpha)
    }

    pub fn is_significant(&self, row: usize, column: usize) -> bool {
        self.is_significant_at(row, column, self.alpha)
    }

    /// Boolean table of `p < alpha`, parallel to `cells`.
    pub fn mask(&self) -> Vec<Vec<bool>> {
        (0..self.rows.len())
            .map(|r| (0..self.pairs.len()).map(|c| self.is_significant(r, c)).collect())
            .collect()
    }

    pub fn significant_count(&self, column: usize) -> usize {
        (0..self.rows.len()).filter(|&r| self.is_significant(r, column)).count()
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.pairs.len()
    }
}

/// Computes one test per (row, pair) cell.
///
/// Rows are ordered by task, then by position in the table's catalog.
/// Cells without enough data become [`MatrixCell::insufficient`] instead of
/// failing the whole matrix.
pub fn build_matrix(
    table: &FeatureTable,
    rows: &[MatrixRow],
    pairs: &[SetPair],
    options: TestOptions,
    alpha: f64,
) -> Result<ComparisonMatrix> {
    if rows.is_empty() || pairs.is_empty() {
        return Err(Error::Value("matrix needs at least one row and one pair".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("alpha {alpha} not in (0, 1)")));
    }
    let mut rows = rows.to_vec();
    let catalog = table.catalog();
    rows.sort_by_key(|r| (r.task, catalog.position(r.feature).unwrap_or(usize::MAX), r.feature));
    rows.dedup();

    let cells: Result<Vec<Vec<MatrixCell>>> = rows
        .par_iter()
        .map(|row| {
            pairs
                .iter()
                .map(
                    |&pair| match compare_sets(table, row.task, row.feature, pair, options) {
                        Ok(t) => Ok(MatrixCell {
                            p_value: Some(t.p_value),
                            n_effective: Some(t.n_effective),
                            method: Some(t.method),
                            low_n: t.min_attainable_p >= alpha,
                        }),
                        Err(Error::InsufficientData(_)) => Ok(MatrixCell::insufficient()),
                        Err(e) => Err(e),
                    },
                )
                .collect()
        })
        .collect();

    Ok(ComparisonMatrix {
        rows,
        pairs: pairs.to_vec(),
        cells: cells?,
        alpha,
    })
}
