//! Plain CSV data sets: a header row of feature names followed by `label`.

use std::path::Path;

use gausspen_core::datasets::{DataError, LabeledDataset};
use gausspen_core::linalg::Matrix;

use crate::report::{format_float, Table};

#[derive(Debug, thiserror::Error)]
pub enum TabularError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("the last header column must be `label`, found `{0}`")]
    MissingLabel(String),
    #[error("header needs at least one feature column before `label`")]
    NoFeatures,
    #[error("row {row}: expected {expected} fields, found {found}")]
    Width { row: usize, expected: usize, found: usize },
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse { row: usize, column: String, value: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Parses CSV text. When `num_classes` is `None` it is one more than the largest label.
pub fn parse_dataset(text: &[u8], num_classes: Option<usize>) -> Result<LabeledDataset, TabularError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    match header.last() {
        Some(last) if last == "label" => {}
        other => return Err(TabularError::MissingLabel(other.cloned().unwrap_or_default())),
    }
    let d = header.len() - 1;
    if d == 0 {
        return Err(TabularError::NoFeatures);
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != d + 1 {
            return Err(TabularError::Width { row, expected: d + 1, found: record.len() });
        }
        for (j, field) in record.iter().enumerate() {
            let bad = || TabularError::Parse { row, column: header[j].clone(), value: field.to_string() };
            if j == d {
                labels.push(field.parse::<usize>().map_err(|_| bad())?);
            } else {
                features.push(field.parse::<f64>().map_err(|_| bad())?);
            }
        }
    }
    let k = num_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    let matrix = Matrix::new(labels.len(), d, features).map_err(|_| DataError::Empty)?;
    Ok(LabeledDataset::new(matrix, labels, k)?)
}

pub fn read_dataset(path: &Path, num_classes: Option<usize>) -> Result<LabeledDataset, TabularError> {
    parse_dataset(&std::fs::read(path)?, num_classes)
}

pub fn dataset_table(data: &LabeledDataset) -> Table {
    let names: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).chain(["label".to_string()]).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut table = Table::new(&refs);
    for i in 0..data.len() {
        let mut row: Vec<String> = data.features.row(i).iter().map(|&v| format_float(v)).collect();
        row.push(data.labels[i].to_string());
        table.push(row);
    }
    table
}

pub fn write_dataset(path: &Path, data: &LabeledDataset) -> std::io::Result<()> {
    dataset_table(data).write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let data = gausspen_core::datasets::make_blobs(3, 4, 2, 1.5, 2).unwrap();
        let bytes = dataset_table(&data).to_bytes();
        assert_eq!(parse_dataset(&bytes, Some(3)).unwrap(), data);
    }

    #[test]
    fn reports_bad_cells() {
        assert!(matches!(parse_dataset(b"a,b\n1,2\n", None), Err(TabularError::MissingLabel(_))));
        assert!(matches!(parse_dataset(b"label\n1\n", None), Err(TabularError::NoFeatures)));
        let err = parse_dataset(b"a,label\n1,0\nzz,1\n", None).unwrap_err();
        assert!(matches!(err, TabularError::Parse { row: 2, .. }), "{err}");
        assert!(matches!(parse_dataset(b"a,label\n1,0,3\n", None), Err(TabularError::Width { row: 1, .. })));
    }
}
