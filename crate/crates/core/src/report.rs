//! Text renderings of feature tables and comparison matrices.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureId;
use crate::ink::{SetId, TaskCategory, TaskId};
use crate::protocol::SetPair;
use crate::stats::{ComparisonMatrix, FeatureTable, MatrixCell, MatrixRow, Method};

const NA: &str = "NA";

fn value_text(feature: FeatureId, value: f64, per_second: bool) -> String {
    if per_second {
        (value * feature.per_second_factor()).to_string()
    } else {
        value.to_string()
    }
}

/// One row per (subject, set, task), one column per catalog feature.
/// Records that failed extraction have `NA` in every feature column.
pub fn feature_table_tsv(table: &FeatureTable, per_second: bool) -> String {
    let features = table.catalog().features();
    let mut out = String::from("subject\tset\ttask");
    for f in features {
        out.push('\t');
        out.push_str(&f.name());
    }
    out.push('\n');
    for key in table.keys() {
        let _ = write!(out, "{}\t{}\t{}", key.subject, key.set, key.task);
        let vector = table.get(key);
        for &f in features {
            out.push('\t');
            match vector.and_then(|v| v.get(f)) {
                Some(v) => out.push_str(&value_text(f, v, per_second)),
                None => out.push_str(NA),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct FeatureRowJson<'a> {
    subject: &'a str,
    set: SetId,
    task: TaskId,
    values: Option<Vec<f64>>,
    flags: Vec<String>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct FeatureTableJson<'a> {
    columns: Vec<String>,
    per_second: bool,
    rows: Vec<FeatureRowJson<'a>>,
}

pub fn feature_table_json(table: &FeatureTable, per_second: bool) -> String {
    let features = table.catalog().features();
    let failures: std::collections::BTreeMap<_, _> = table.failures().collect();
    let rows = table
        .keys()
        .into_iter()
        .map(|key| {
            let vector = table.get(key);
            FeatureRowJson {
                subject: &key.subject,
                set: key.set,
                task: key.task,
                values: vector.map(|v| {
                    features
                        .iter()
                        .map(|&f| {
                            let x = v.get(f).unwrap_or(f64::NAN);
                            if per_second {
                                x * f.per_second_factor()
                            } else {
                                x
                            }
                        })
                        .collect()
                }),
                flags: vector
                    .map(|v| v.flags.iter().map(FeatureId::name).collect())
                    .unwrap_or_default(),
                error: failures.get(key).copied(),
            }
        })
        .collect();
    let doc = FeatureTableJson {
        columns: features.iter().map(FeatureId::name).collect(),
        per_second,
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("feature table serializes") + "\n"
}

fn matrix_header(matrix: &ComparisonMatrix) -> String {
    let mut out = String::from("task\tcategory\tfeature");
    for pair in &matrix.pairs {
        let _ = write!(out, "\t{pair}");
    }
    out.push('\n');
    out
}

/// p-values in the published table layout: one row per (task, feature),
/// one column per set pair, `NA` where a test could not run.
pub fn matrix_tsv(matrix: &ComparisonMatrix) -> String {
    let mut out = matrix_header(matrix);
    for (r, row) in matrix.rows.iter().enumerate() {
        let _ = write!(out, "{}\t{}\t{}", row.task, row.task.category(), row.feature);
        for c in 0..matrix.pairs.len() {
            match matrix.cell(r, c).p_value {
                Some(p) => {
                    let _ = write!(out, "\t{p}");
                }
                None => {
                    let _ = write!(out, "\t{NA}");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Significance mask parallel to [`matrix_tsv`]: 1 where `p < alpha`.
pub fn mask_tsv(matrix: &ComparisonMatrix) -> String {
    let mut out = matrix_header(matrix);
    for (r, row) in matrix.rows.iter().enumerate() {
        let _ = write!(out, "{}\t{}\t{}", row.task, row.task.category(), row.feature);
        for c in 0..matrix.pairs.len() {
            let text = match matrix.cell(r, c).p_value {
                None => NA,
                Some(_) if matrix.is_significant(r, c) => "1",
                Some(_) => "0",
            };
            let _ = write!(out, "\t{text}");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    p_value: Option<f64>,
    n_effective: Option<usize>,
    method: Option<Method>,
    low_n: bool,
    significant: bool,
}

#[derive(Serialize, Deserialize)]
struct RowJson {
    task: TaskId,
    category: TaskCategory,
    feature: FeatureId,
    label: String,
    cells: Vec<CellJson>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    alpha: f64,
    pairs: Vec<SetPair>,
    rows: Vec<RowJson>,
}

pub fn matrix_json(matrix: &ComparisonMatrix) -> String {
    let doc = MatrixJson {
        alpha: matrix.alpha,
        pairs: matrix.pairs.clone(),
        rows: matrix
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| RowJson {
                task: row.task,
                category: row.task.category(),
                feature: row.feature,
                label: row.feature.label(),
                cells: (0..matrix.pairs.len())
                    .map(|c| {
                        let cell = matrix.cell(r, c);
                        CellJson {
                            p_value: cell.p_value,
                            n_effective: cell.n_effective,
                            method: cell.method,
                            low_n: cell.low_n,
                            significant: matrix.is_significant(r, c),
                        }
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("matrix serializes") + "\n"
}

/// Reads a matrix written by [`matrix_json`]. Derived fields (category,
/// label, significance) are recomputed rather than trusted.
pub fn matrix_from_json(text: &str) -> Result<ComparisonMatrix> {
    let doc: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Value(format!("matrix json: {e}")))?;
    if !(doc.alpha > 0.0 && doc.alpha < 1.0) {
        return Err(Error::Range(format!("alpha {} not in (0, 1)", doc.alpha)));
    }
    let mut rows = Vec::with_capacity(doc.rows.len());
    let mut cells = Vec::with_capacity(doc.rows.len());
    for row in doc.rows {
        if row.cells.len() != doc.pairs.len() {
            return Err(Error::Shape {
                left: doc.pairs.len(),
                right: row.cells.len(),
            });
        }
        rows.push(MatrixRow {
            task: row.task,
            feature: row.feature,
        });
        cells.push(
            row.cells
                .into_iter()
                .map(|c| MatrixCell {
                    p_value: c.p_value,
                    n_effective: c.n_effective,
                    method: c.method,
                    low_n: c.low_n,
                })
                .collect(),
        );
    }
    Ok(ComparisonMatrix {
        rows,
        pairs: doc.pairs,
        cells,
        alpha: doc.alpha,
    })
}

/// Formats a p-value with four decimals, or in scientific notation when it
/// would round to zero.
pub fn format_p(p: f64) -> String {
    if p != 0.0 && p < 5e-5 {
        format!("{p:.1e}")
    } else {
        format!("{p:.4}")
    }
}

/// Markdown table with task type, task number and feature label columns
/// followed by one column per set pair. Significant cells are bold.
pub fn matrix_markdown(matrix: &ComparisonMatrix) -> String {
    let mut out = String::from("| Task Type | Figure | Feature |");
    for pair in &matrix.pairs {
        let _ = write!(out, " {pair} |");
    }
    out.push_str("\n|---|---|---|");
    for _ in &matrix.pairs {
        out.push_str("---|");
    }
    out.push('\n');

    let mut previous: Option<(TaskCategory, TaskId)> = None;
    for (r, row) in matrix.rows.iter().enumerate() {
        let category = row.task.category();
        let show_category = previous.is_none_or(|(c, _)| c != category);
        let show_task = previous.is_none_or(|(_, t)| t != row.task);
        previous = Some((category, row.task));
        let _ = write!(
            out,
            "| {} | {} | {} |",
            if show_category { category.label() } else { "" },
            if show_task { row.task.to_string() } else { String::new() },
            row.feature.label()
        );
        for c in 0..matrix.pairs.len() {
            let text = match matrix.cell(r, c).p_value {
                None => NA.to_string(),
                Some(p) if matrix.is_significant(r, c) => format!("**{}**", format_p(p)),
                Some(p) => format_p(p),
            };
            let _ = write!(out, " {text} |");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "\nBold: p < {}. NA: not enough paired data.", matrix.alpha);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::published_table2;

    #[test]
    fn markdown_layout_of_published_table() {
        let md = matrix_markdown(&published_table2());
        let lines: Vec<&str> = md.lines().collect();
        assert!(lines[0].starts_with("| Task Type | Figure | Feature | S1-S2 | S1-S3 |"));
        assert!(lines[0].ends_with("S3-S5 | S4-S5 |"));
        // header, separator, 29 rows
        assert_eq!(lines.iter().filter(|l| l.starts_with('|')).count(), 31);
        assert!(lines[2].starts_with("| Cognitive | 1 | Standard deviation of speed | 0.8630 |"));
        assert!(lines[2].contains("**0.0412**"));
        assert!(md.contains("| **0.0009** |"));
    }

    #[test]
    fn tsv_and_mask_are_parallel() {
        let t = published_table2();
        let values = matrix_tsv(&t);
        let mask = mask_tsv(&t);
        assert_eq!(values.lines().count(), 30);
        assert_eq!(mask.lines().count(), 30);
        let first_values: Vec<&str> = values.lines().nth(1).unwrap().split('\t').collect();
        let first_mask: Vec<&str> = mask.lines().nth(1).unwrap().split('\t').collect();
        assert_eq!(&first_values[..3], &["1", "Cognitive", "std_speed"]);
        assert_eq!(first_values[3], "0.863");
        assert_eq!(first_mask[3..], ["0", "0", "0", "0", "1", "0", "1", "0", "0", "0"]);
    }

    #[test]
    fn json_is_valid() {
        let doc: serde_json::Value = serde_json::from_str(&matrix_json(&published_table2())).unwrap();
        assert_eq!(doc["pairs"].as_array().unwrap().len(), 10);
        assert_eq!(doc["rows"][0]["feature"], "std_speed");
        assert_eq!(doc["rows"][0]["cells"][4]["significant"], true);
    }

    #[test]
    fn json_round_trip() {
        let t = published_table2();
        assert_eq!(matrix_from_json(&matrix_json(&t)).unwrap(), t);
        assert!(matrix_from_json("{}").is_err());
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.0412), "0.0412");
        assert_eq!(format_p(9e-4), "0.0009");
        assert_eq!(format_p(1e-7), "1.0e-7");
        assert_eq!(format_p(1.0), "1.0000");
    }
}
