use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `T × D` table of reals, one timestep per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateSeries {
    pub values: Vec<Vec<f64>>,
    pub columns: Vec<String>,
    /// Sampling period, when known.
    pub period: Option<f64>,
    pub units: Option<String>,
    /// Per-column statistics used for normalisation, if any was applied.
    pub normalization: Option<Vec<ColumnStats>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

impl MultivariateSeries {
    pub fn from_column(values: &[f64], name: &str) -> Self {
        Self {
            values: values.iter().map(|&v| vec![v]).collect(),
            columns: vec![name.to_string()],
            period: None,
            units: None,
            normalization: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Standardises every column with statistics from the first `fit_rows` rows.
    pub fn normalize_with_prefix(&mut self, fit_rows: usize) {
        let fit_rows = fit_rows.clamp(1, self.len().max(1));
        let stats: Vec<ColumnStats> = (0..self.dim())
            .map(|j| {
                let head = self.values[..fit_rows].iter().map(|r| r[j]);
                let mean = head.clone().sum::<f64>() / fit_rows as f64;
                let var = head.map(|v| (v - mean).powi(2)).sum::<f64>() / fit_rows as f64;
                let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                ColumnStats { mean, std }
            })
            .collect();
        for row in &mut self.values {
            for (v, s) in row.iter_mut().zip(&stats) {
                *v = (*v - s.mean) / s.std;
            }
        }
        self.normalization = Some(stats);
    }

    /// Writes the table with a header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeaderMode {
    /// Header present iff any cell of the first row is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub header: HeaderMode,
    /// Standardise columns with statistics of the leading `train_ratio` share
    /// of rows. `None` keeps raw values.
    pub normalize_train_ratio: Option<f64>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            header: HeaderMode::Auto,
            normalize_train_ratio: None,
        }
    }
}

/// A row dropped during ingestion, by 1-based file line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub series: MultivariateSeries,
    pub rejected: Vec<RejectedRow>,
}

pub fn load_csv_series(path: &Path, options: &CsvOptions) -> Result<CsvLoad> {
    let text = std::fs::read_to_string(path)?;
    parse_csv_series(&text, options)
}

pub(crate) fn parse_csv_series(text: &str, options: &CsvOptions) -> Result<CsvLoad> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        // Fully blank lines carry no timestep.
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::Empty("csv file has no rows"));
    }

    let first_is_header = match options.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => records[0]
            .1
            .iter()
            .any(|c| !c.is_empty() && c.parse::<f64>().is_err()),
    };
    let (columns, body) = if first_is_header {
        let header: Vec<String> = records[0].1.iter().map(str::to_string).collect();
        (header, &records[1..])
    } else {
        let width = records[0].1.len();
        ((0..width).map(|j| format!("x{j}")).collect(), &records[..])
    };
    let width = columns.len();
    if body.is_empty() {
        return Err(Error::Empty("csv file has a header but no data rows"));
    }

    let mut values = Vec::with_capacity(body.len());
    let mut rejected = Vec::new();
    'rows: for (line, rec) in body {
        if rec.len() != width {
            return Err(Error::Csv {
                line: *line,
                reason: format!("expected {width} columns, found {}", rec.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            if cell.is_empty() {
                rejected.push(RejectedRow {
                    line: *line,
                    reason: format!("blank cell in column {}", columns[j]),
                });
                continue 'rows;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                line: *line,
                reason: format!("cannot parse `{cell}` in column {}", columns[j]),
            })?;
            if !v.is_finite() {
                rejected.push(RejectedRow {
                    line: *line,
                    reason: format!("non-finite value in column {}", columns[j]),
                });
                continue 'rows;
            }
            row.push(v);
        }
        values.push(row);
    }
    if values.is_empty() {
        return Err(Error::Empty("every csv row was rejected"));
    }

    let mut series = MultivariateSeries {
        values,
        columns,
        period: None,
        units: None,
        normalization: None,
    };
    if let Some(ratio) = options.normalize_train_ratio {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::param("normalize_train_ratio", "must lie in (0, 1]"));
        }
        let fit_rows = ((series.len() as f64 * ratio + 1e-9).floor() as usize).max(1);
        series.normalize_with_prefix(fit_rows);
    }
    Ok(CsvLoad { series, rejected })
}
