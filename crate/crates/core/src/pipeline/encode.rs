use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::RawTable;
use crate::error::{config, Result};
use crate::svm::Label;

/// Maps the label column onto ±1. Other values drop the row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub column: String,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnEncoding {
    /// Parse the cell as a number.
    Numeric,
    /// Look the cell up in a value table.
    Ordinal(BTreeMap<String, f64>),
    /// One indicator column per listed category, in list order.
    OneHot(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub column: String,
    pub encoding: ColumnEncoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub label: LabelSpec,
    pub features: Vec<FeatureSpec>,
    /// Trim surrounding whitespace before lookup.
    #[serde(default = "yes")]
    pub trim: bool,
    /// Compare categories case-insensitively.
    #[serde(default)]
    pub case_insensitive: bool,
}

fn yes() -> bool {
    true
}

/// Numeric samples with ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<Label>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(crate::error::usage(format!(
                "{} feature rows vs {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::usage("dataset contains non-finite values"));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows as owned vectors.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.features.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// The samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(ndarray::Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeSummary {
    pub input_rows: usize,
    pub dropped_rows: usize,
    pub emitted_rows: usize,
}

impl EncodingSpec {
    fn normalize<'a>(&self, s: &'a str) -> std::borrow::Cow<'a, str> {
        let s = if self.trim { s.trim() } else { s };
        if self.case_insensitive {
            s.to_lowercase().into()
        } else {
            s.into()
        }
    }

    fn matches(&self, cell: &str, candidate: &str) -> bool {
        self.normalize(cell) == self.normalize(candidate)
    }

    /// Output column names after one-hot expansion.
    pub fn output_names(&self) -> Vec<String> {
        self.features
            .iter()
            .flat_map(|f| match &f.encoding {
                ColumnEncoding::OneHot(cats) => {
                    cats.iter().map(|c| format!("{}={}", f.column, c)).collect()
                }
                _ => vec![f.column.clone()],
            })
            .collect()
    }
}

fn encode_cell(spec: &EncodingSpec, enc: &ColumnEncoding, cell: &str, out: &mut Vec<f64>) -> bool {
    match enc {
        ColumnEncoding::Numeric => match spec.normalize(cell).parse::<f64>() {
            Ok(v) if v.is_finite() => {
                out.push(v);
                true
            }
            _ => false,
        },
        ColumnEncoding::Ordinal(map) => {
            match map.iter().find(|(k, _)| spec.matches(cell, k)) {
                Some((_, &v)) => {
                    out.push(v);
                    true
                }
                None => false,
            }
        }
        ColumnEncoding::OneHot(cats) => match cats.iter().position(|c| spec.matches(cell, c)) {
            Some(hit) => {
                out.extend((0..cats.len()).map(|k| if k == hit { 1.0 } else { 0.0 }));
                true
            }
            None => false,
        },
    }
}

/// Applies `spec` to every row. Rows with a missing or unmapped value in
/// any used column are dropped and counted.
pub fn encode_dataset(table: &RawTable, spec: &EncodingSpec) -> Result<(Dataset, EncodeSummary)> {
    let label_col = table
        .column_index(&spec.label.column)
        .ok_or_else(|| config(format!("label column {:?} not found", spec.label.column)))?;
    let feature_cols = spec
        .features
        .iter()
        .map(|f| {
            table
                .column_index(&f.column)
                .ok_or_else(|| config(format!("feature column {:?} not found", f.column)))
        })
        .collect::<Result<Vec<_>>>()?;
    if spec.features.is_empty() {
        return Err(config("encoding spec lists no feature columns"));
    }
    let names = spec.output_names();
    let width = names.len();

    let mut flat = Vec::with_capacity(table.len() * width);
    let mut labels = Vec::with_capacity(table.len());
    let mut row_buf = Vec::with_capacity(width);
    for row in &table.rows {
        let cell = &row[label_col];
        let label: Label = if spec.label.positive.iter().any(|p| spec.matches(cell, p)) {
            1
        } else if spec.label.negative.iter().any(|n| spec.matches(cell, n)) {
            -1
        } else {
            continue;
        };
        row_buf.clear();
        let ok = spec
            .features
            .iter()
            .zip(&feature_cols)
            .all(|(f, &col)| encode_cell(spec, &f.encoding, &row[col], &mut row_buf));
        if ok {
            flat.extend_from_slice(&row_buf);
            labels.push(label);
        }
    }
    let summary = EncodeSummary {
        input_rows: table.len(),
        dropped_rows: table.len() - labels.len(),
        emitted_rows: labels.len(),
    };
    if summary.dropped_rows > 0 {
        log::info!(
            "encoding dropped {} of {} rows with missing or unmapped values",
            summary.dropped_rows,
            summary.input_rows
        );
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(config(format!(
            "label column {:?} is not binary after mapping ({} positive of {})",
            spec.label.column,
            pos,
            labels.len()
        )));
    }
    let features = Array2::from_shape_vec((labels.len(), width), flat).expect("row width is fixed");
    Ok((Dataset::new(features, labels, names)?, summary))
}
