//! Time-series datasets in the UCR archive layout.
//!
//! A UCR file holds one series per line: the class label followed by the
//! values, all tab separated. Series in one file may have different lengths.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{KGraphError, Result};

/// Shortest series (and shortest subsequence) the embedding accepts.
pub const MIN_SERIES_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(id: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_SERIES_LEN {
            return Err(KGraphError::SeriesTooShort {
                id,
                len: values.len(),
            });
        }
        if let Some(position) = values.iter().position(|v| !v.is_finite()) {
            return Err(KGraphError::NonFinite { id, position });
        }
        Ok(Self { id, values })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All windows of `length` consecutive values, by increasing start offset.
    pub fn subsequences(&self, length: usize) -> Result<Vec<Subsequence<'_>>> {
        if length < MIN_SERIES_LEN || length > self.len() {
            return Err(KGraphError::LengthOutOfRange {
                length,
                max: self.len(),
            });
        }
        Ok(self
            .values
            .windows(length)
            .enumerate()
            .map(|(start, values)| Subsequence {
                values,
                series: self.id,
                start,
            })
            .collect())
    }

    /// Mean absolute step divided by the amplitude of the series.
    pub fn noise_ratio(&self) -> Result<f64> {
        noise_ratio(&self.values)
    }

    /// Copy of the series rescaled to zero mean and unit variance.
    /// A constant series maps to all zeros.
    pub fn z_normalized(&self) -> TimeSeries {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        let values = if std > 0.0 {
            self.values.iter().map(|v| (v - mean) / std).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        TimeSeries {
            id: self.id,
            values,
        }
    }
}

/// A contiguous window `T[start..start + len]` of one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsequence<'a> {
    pub values: &'a [f64],
    pub series: usize,
    pub start: usize,
}

pub fn noise_ratio(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(KGraphError::ZeroAmplitude);
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let amplitude = max - min;
    if amplitude <= 0.0 {
        return Err(KGraphError::ZeroAmplitude);
    }
    let steps = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    Ok(steps / (values.len() - 1) as f64 / amplitude)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    series: Vec<TimeSeries>,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    /// Builds a dataset, renumbering series ids to their position.
    pub fn new(
        name: impl Into<String>,
        series: Vec<Vec<f64>>,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        let series = series
            .into_iter()
            .enumerate()
            .map(|(id, values)| TimeSeries::new(id, values))
            .collect::<Result<Vec<_>>>()?;
        Self::from_series(name, series, labels)
    }

    fn from_series(
        name: impl Into<String>,
        mut series: Vec<TimeSeries>,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        if series.len() < 2 {
            return Err(KGraphError::TooFewSeries(series.len()));
        }
        if let Some(labels) = &labels {
            if labels.len() != series.len() {
                return Err(KGraphError::LabelCountMismatch {
                    labels: labels.len(),
                    series: series.len(),
                });
            }
        }
        for (id, s) in series.iter_mut().enumerate() {
            s.id = id;
        }
        Ok(Self {
            name: name.into(),
            series,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.series.iter().map(TimeSeries::len).collect()
    }

    pub fn min_len(&self) -> usize {
        self.series.iter().map(TimeSeries::len).min().unwrap_or(0)
    }

    /// Number of distinct class labels, if labels are known.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|labels| {
            let mut distinct = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            distinct.len()
        })
    }

    pub fn z_normalized(&self) -> Dataset {
        Dataset {
            name: self.name.clone(),
            series: self.series.iter().map(TimeSeries::z_normalized).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Concatenates two datasets (e.g. the TRAIN and TEST splits).
    pub fn concat(name: impl Into<String>, first: Dataset, second: Dataset) -> Result<Dataset> {
        let labels = match (first.labels, second.labels) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        let mut series = first.series;
        series.extend(second.series);
        Self::from_series(name, series, labels)
    }

    /// Writes the dataset in UCR layout. Unlabelled datasets get label 0.
    pub fn write_ucr_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, s) in self.series.iter().enumerate() {
            let label = self.labels.as_ref().map_or(0, |l| l[i]);
            write!(out, "{label}")?;
            for v in &s.values {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parses UCR-layout text. Row numbers in errors are 1-based.
pub fn parse_ucr_tsv(name: &str, text: &str) -> Result<Dataset> {
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let row = index + 1;
        let line = line.trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t').map(str::trim);
        let label_field = fields.next().unwrap_or_default();
        let label: f64 = label_field.parse().map_err(|_| KGraphError::MalformedRow {
            row,
            message: format!("label {label_field:?} is not a number"),
        })?;
        if !label.is_finite() {
            return Err(KGraphError::MalformedRow {
                row,
                message: "label is not finite".into(),
            });
        }
        let values = fields
            .enumerate()
            .map(|(col, field)| {
                let value: f64 = field.parse().map_err(|_| KGraphError::MalformedRow {
                    row,
                    message: format!("value {field:?} in column {} is not a number", col + 2),
                })?;
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(KGraphError::MalformedRow {
                        row,
                        message: format!("non-finite value in column {}", col + 2),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < MIN_SERIES_LEN {
            return Err(KGraphError::RowTooShort { row });
        }
        labels.push(label.trunc() as i64);
        series.push(TimeSeries {
            id: series.len(),
            values,
        });
    }
    Dataset::from_series(name, series, Some(labels))
}

pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| KGraphError::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    parse_ucr_tsv(name, &text)
}

/// Loads `<dir>/<Name>_TRAIN.tsv` and `<dir>/<Name>_TEST.tsv`, where `Name`
/// is the directory's file name, and concatenates them.
pub fn load_ucr_dir(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let name = dir
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| KGraphError::InvalidConfig(format!("bad dataset dir {}", dir.display())))?;
    let train = load_ucr_tsv(dir.join(format!("{name}_TRAIN.tsv")))?;
    let test = load_ucr_tsv(dir.join(format!("{name}_TEST.tsv")))?;
    Dataset::concat(name, train, test)
}

/// Loads either a single UCR file or a UCR dataset directory.
pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    if path.is_dir() {
        load_ucr_dir(path)
    } else {
        load_ucr_tsv(path)
    }
}
