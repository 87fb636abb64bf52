//! CSV ingestion with categorical encoding and global min-max scaling.

use std::collections::HashMap;
use std::path::Path;

use log::warn;

use crate::error::{FiresError, Result};

use super::data::{Dataset, Label, StreamBatch};

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl LabelColumn {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize> {
        let n = headers.len();
        match self {
            LabelColumn::Last if n > 0 => Ok(n - 1),
            LabelColumn::Index(i) if *i < n => Ok(*i),
            LabelColumn::Name(name) => headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| FiresError::Data(format!("label column '{name}' not found"))),
            _ => Err(FiresError::Data(format!(
                "label column {self:?} out of range for {n} columns"
            ))),
        }
    }
}

/// Outcome of loading a file: the scaled dataset plus any non-fatal findings.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
    /// Original label strings for -1 and +1.
    pub classes: [String; 2],
}

/// Reads a headed, comma-separated file.
///
/// Columns that do not parse as numbers are integer-encoded by order of first
/// appearance. Every feature is then scaled to `[0, 1]` with the column's
/// global min and max; constant columns become 0 and produce a warning. The
/// lexicographically smaller of the two class labels maps to -1.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| FiresError::Data(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let label_idx = label.resolve(&headers)?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(FiresError::Data("no feature columns".into()));
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    let mut raw_labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(FiresError::Data(format!(
                "row {} has {} fields, header has {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        for (col, &c) in raw.iter_mut().zip(&feature_cols) {
            let v = &record[c];
            if v.is_empty() {
                return Err(FiresError::Data(format!(
                    "missing value in column '{}' at row {}",
                    &headers[c],
                    line + 2
                )));
            }
            col.push(v.to_string());
        }
        raw_labels.push(record[label_idx].to_string());
    }
    if raw_labels.is_empty() {
        return Err(FiresError::Data("file has no data rows".into()));
    }

    let mut classes: Vec<&str> = raw_labels.iter().map(String::as_str).collect();
    classes.sort_unstable();
    classes.dedup();
    match classes.len() {
        1 => {
            return Err(FiresError::Data(format!(
                "single class '{}' in label column",
                classes[0]
            )))
        }
        2 => {}
        n => return Err(FiresError::Data(format!("expected 2 classes, found {n}"))),
    }
    let negative = classes[0].to_string();
    let positive = classes[1].to_string();
    let labels: Vec<Label> = raw_labels
        .iter()
        .map(|l| {
            if *l == negative {
                Label::Negative
            } else {
                Label::Positive
            }
        })
        .collect();

    let n_rows = labels.len();
    let j = feature_cols.len();
    let mut warnings = Vec::new();
    let mut x = vec![0.0; n_rows * j];
    for (f, (col, &c)) in raw.iter().zip(&feature_cols).enumerate() {
        let name = &headers[c];
        let values = encode_column(col, name)?;
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        if range == 0.0 {
            let msg = format!("column '{name}' is constant; scaled to 0");
            warn!("{msg}");
            warnings.push(msg);
        }
        for (i, v) in values.iter().enumerate() {
            x[i * j + f] = if range > 0.0 { (v - lo) / range } else { 0.0 };
        }
    }
    let mut dataset = Dataset::new(x, labels, j)?;
    dataset.feature_names = feature_cols
        .iter()
        .map(|&c| headers[c].to_string())
        .collect();
    Ok(LoadedCsv {
        dataset,
        warnings,
        classes: [negative, positive],
    })
}

/// Numbers if every cell parses as a finite number, otherwise factor codes.
fn encode_column(col: &[String], name: &str) -> Result<Vec<f64>> {
    let parsed: Option<Vec<f64>> = col.iter().map(|v| v.parse::<f64>().ok()).collect();
    match parsed {
        Some(values) => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(FiresError::Data(format!(
                    "non-finite value in column '{name}'"
                )));
            }
            Ok(values)
        }
        None => {
            let mut codes: HashMap<&str, f64> = HashMap::new();
            Ok(col
                .iter()
                .map(|v| {
                    let next = codes.len() as f64;
                    *codes.entry(v.as_str()).or_insert(next)
                })
                .collect())
        }
    }
}

/// Loads and splits into batches of `batch_size` rows in file order.
pub fn load_csv_stream(
    path: impl AsRef<Path>,
    batch_size: usize,
    label: &LabelColumn,
) -> Result<Vec<StreamBatch>> {
    if batch_size == 0 {
        return Err(FiresError::InvalidConfig(
            "batch size must be positive".into(),
        ));
    }
    let loaded = load_csv(path, label)?;
    Ok(loaded.dataset.batches(batch_size).collect())
}
