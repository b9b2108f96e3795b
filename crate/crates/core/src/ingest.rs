//! Tabular input: CSV loading and per-feature standardization.
//!
//! Files store one data point per row. Internally the data matrix is held
//! column-major as `d × N` (features × points), so column `n` is the data
//! point `x_n`.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which column of the input table carries the categorical label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Interprets a user-supplied selector: a bare integer is a 0-based
    /// index, anything else is a header name.
    pub fn parse(s: &str) -> Self {
        match s.trim().parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.trim().to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            label_column: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardizePolicy {
    None,
    Center,
    Zscore,
}

/// Variance normalization used for z-scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdConvention {
    /// Divide the sum of squares by `N`.
    #[default]
    Population,
    /// Divide the sum of squares by `N - 1`.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantRowPolicy {
    #[default]
    Error,
    Zero,
}

/// Record of the standardization applied to a dataset.
///
/// `original = standardized * scales[j] + means[j]` for every feature `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub policy: StandardizePolicy,
    pub convention: StdConvention,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Feature rows that were constant under z-scoring and mapped to zero.
    pub constant_rows: Vec<usize>,
}

impl Standardization {
    fn identity(d: usize) -> Self {
        Self {
            policy: StandardizePolicy::None,
            convention: StdConvention::Population,
            means: vec![0.0; d],
            scales: vec![1.0; d],
            constant_rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `d × N`; column `n` is data point `n`.
    pub values: DMatrix<f64>,
    pub labels: Option<Vec<String>>,
    pub feature_names: Option<Vec<String>>,
    pub standardization: Standardization,
}

impl Dataset {
    /// Wraps a `d × N` matrix. Fails on an empty or non-finite matrix.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyTable);
        }
        check_finite(&values)?;
        let d = values.nrows();
        Ok(Self {
            values,
            labels: None,
            feature_names: None,
            standardization: Standardization::identity(d),
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn point(&self, n: usize) -> nalgebra::DVector<f64> {
        self.values.column(n).into_owned()
    }

    /// Distinct labels in order of first appearance.
    pub fn distinct_labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        if let Some(labels) = &self.labels {
            for l in labels {
                if !out.contains(&l.as_str()) {
                    out.push(l);
                }
            }
        }
        out
    }

    /// Undoes the recorded standardization.
    pub fn destandardized(&self) -> DMatrix<f64> {
        let s = &self.standardization;
        DMatrix::from_fn(self.d(), self.n(), |j, n| {
            self.values[(j, n)] * s.scales[j] + s.means[j]
        })
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for n in 0..values.ncols() {
        for j in 0..values.nrows() {
            if !values[(j, n)].is_finite() {
                return Err(Error::NonFinite { feature: j, point: n });
            }
        }
    }
    Ok(())
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_from_reader(file, options)
}

/// Parses a CSV table with one data point per row. Row numbers in errors are
/// 1-based file line numbers; column numbers are 0-based field indices.
pub fn load_csv_from_reader<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        // a blank line parses as a single empty field
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows {
                row: line,
                expected,
                found: record.len(),
            });
        }
        if label_idx.is_none() {
            label_idx = resolve_label(options.label_column.as_ref(), header.as_deref(), expected)?;
        }
        let mut row = Vec::with_capacity(expected);
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: line,
                column: col,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: line,
                    column: col,
                    value: cell.to_string(),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }

    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::EmptyTable);
    }
    let n = rows.len();
    let d = rows[0].len();
    let values = DMatrix::from_fn(d, n, |j, i| rows[i][j]);

    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, name)| name)
            .collect()
    });

    Ok(Dataset {
        values,
        labels: label_idx.map(|_| labels),
        feature_names,
        standardization: Standardization::identity(d),
    })
}

fn resolve_label(
    selector: Option<&LabelColumn>,
    header: Option<&[String]>,
    width: usize,
) -> Result<Option<usize>> {
    let Some(selector) = selector else {
        return Ok(None);
    };
    let idx = match selector {
        LabelColumn::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::MissingLabelColumn(i.to_string()));
            }
            *i
        }
    };
    Ok(Some(idx))
}

/// Applies `policy` to every feature row using the population convention.
pub fn standardize(
    ds: &Dataset,
    policy: StandardizePolicy,
    constant_rows: ConstantRowPolicy,
) -> Result<Dataset> {
    standardize_with_convention(ds, policy, constant_rows, StdConvention::Population)
}

pub fn standardize_with_convention(
    ds: &Dataset,
    policy: StandardizePolicy,
    constant_rows: ConstantRowPolicy,
    convention: StdConvention,
) -> Result<Dataset> {
    let (d, n) = ds.values.shape();
    let mut out = ds.values.clone();
    let mut means = vec![0.0; d];
    let mut scales = vec![1.0; d];
    let mut constant = Vec::new();

    if policy != StandardizePolicy::None {
        for j in 0..d {
            let row = ds.values.row(j);
            let mean = row.iter().sum::<f64>() / n as f64;
            means[j] = mean;
            for v in out.row_mut(j).iter_mut() {
                *v -= mean;
            }
            if policy != StandardizePolicy::Zscore {
                continue;
            }
            let ss: f64 = out.row(j).iter().map(|v| v * v).sum();
            let denom = match convention {
                StdConvention::Population => n as f64,
                StdConvention::Sample => n.saturating_sub(1) as f64,
            };
            let max_abs = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let std = if denom > 0.0 { (ss / denom).sqrt() } else { 0.0 };
            if std <= 1e-14 * max_abs.max(f64::MIN_POSITIVE) {
                match constant_rows {
                    ConstantRowPolicy::Error => return Err(Error::ConstantRow { row: j }),
                    ConstantRowPolicy::Zero => {
                        out.row_mut(j).fill(0.0);
                        constant.push(j);
                    }
                }
            } else {
                scales[j] = std;
                for v in out.row_mut(j).iter_mut() {
                    *v /= std;
                }
            }
        }
    }

    Ok(Dataset {
        values: out,
        labels: ds.labels.clone(),
        feature_names: ds.feature_names.clone(),
        standardization: Standardization {
            policy,
            convention,
            means,
            scales,
            constant_rows: constant,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_dataset(row: &[f64]) -> Dataset {
        Dataset::from_matrix(DMatrix::from_row_slice(1, row.len(), row)).unwrap()
    }

    #[test]
    fn single_cell_file() {
        let ds = load_csv_from_reader(
            "3.5\n".as_bytes(),
            &CsvOptions {
                has_header: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((ds.d(), ds.n()), (1, 1));
        assert_eq!(ds.values[(0, 0)], 3.5);
        assert_eq!(ds.standardization.policy, StandardizePolicy::None);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = load_csv_from_reader(
            "1,2,3\n4,5,6,7\n".as_bytes(),
            &CsvOptions {
                has_header: false,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::RaggedRows {
                row: 2,
                expected: 3,
                found: 4
            }
        ));
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let err = load_csv_from_reader(
            "a,b\n1,2\n3,x\n".as_bytes(),
            &CsvOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::NonNumeric { row, column, value } => {
                assert_eq!((row, column, value.as_str()), (3, 1, "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_table_rejected() {
        let err = load_csv_from_reader("a,b\n".as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyTable));
    }

    #[test]
    fn nan_cell_rejected() {
        let err = load_csv_from_reader(
            "1,NaN\n".as_bytes(),
            &CsvOptions {
                has_header: false,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonNumeric { column: 1, .. }));
    }

    #[test]
    fn label_by_index_and_delimiter() {
        let ds = load_csv_from_reader(
            "x;1;2\ny;3;4\n".as_bytes(),
            &CsvOptions {
                delimiter: b';',
                has_header: false,
                label_column: Some(LabelColumn::Index(0)),
            },
        )
        .unwrap();
        assert_eq!((ds.d(), ds.n()), (2, 2));
        assert_eq!(ds.values[(1, 1)], 4.0);
        assert_eq!(ds.labels.unwrap(), vec!["x", "y"]);
    }

    #[test]
    fn missing_label_column() {
        let err = load_csv_from_reader(
            "a,b\n1,2\n".as_bytes(),
            &CsvOptions {
                label_column: Some(LabelColumn::Name("species".into())),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
    }

    #[test]
    fn zscore_population_convention() {
        let ds = standardize(
            &row_dataset(&[1.0, 2.0, 3.0]),
            StandardizePolicy::Zscore,
            ConstantRowPolicy::Error,
        )
        .unwrap();
        // population std of (1,2,3) is sqrt(2/3)
        let a = 1.5_f64.sqrt();
        let got: Vec<f64> = ds.values.iter().copied().collect();
        for (g, e) in got.iter().zip([-a, 0.0, a]) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn zscore_sample_convention() {
        let ds = standardize_with_convention(
            &row_dataset(&[1.0, 2.0, 3.0]),
            StandardizePolicy::Zscore,
            ConstantRowPolicy::Error,
            StdConvention::Sample,
        )
        .unwrap();
        let got: Vec<f64> = ds.values.iter().copied().collect();
        assert_eq!(got, vec![-1.0, 0.0, 1.0]);
        assert_eq!(ds.standardization.scales, vec![1.0]);
    }

    #[test]
    fn none_policy_is_identity() {
        let src = row_dataset(&[4.0, -1.0, 7.5]);
        let ds = standardize(&src, StandardizePolicy::None, ConstantRowPolicy::Error).unwrap();
        assert_eq!(ds.values, src.values);
    }

    #[test]
    fn constant_row_policies() {
        let src = row_dataset(&[5.0, 5.0, 5.0]);
        let zeroed = standardize(&src, StandardizePolicy::Zscore, ConstantRowPolicy::Zero).unwrap();
        assert!(zeroed.values.iter().all(|&v| v == 0.0));
        assert_eq!(zeroed.standardization.constant_rows, vec![0]);
        assert_eq!(zeroed.destandardized(), src.values);

        let err = standardize(&src, StandardizePolicy::Zscore, ConstantRowPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::ConstantRow { row: 0 }));
    }

    #[test]
    fn center_zeroes_row_means() {
        let ds = Dataset::from_matrix(DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 6.0, -3.0, 0.5, 0.25]))
            .unwrap();
        let c = standardize(&ds, StandardizePolicy::Center, ConstantRowPolicy::Error).unwrap();
        for j in 0..2 {
            let row = c.values.row(j);
            let max_abs = ds.values.row(j).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(row.sum().abs() / 3.0 <= 1e-12 * max_abs);
        }
        assert!((c.destandardized() - &ds.values).amax() < 1e-15);
    }
}
