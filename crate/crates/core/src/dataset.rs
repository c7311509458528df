//! Point clouds with optional binary labels, and their CSV form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `n` observations in `R^p`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<bool>>,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len() % dim,
            });
        }
        for (i, row) in values.chunks(dim).enumerate() {
            check_finite(row).map_err(|e| e.at_row(i))?;
        }
        Ok(Dataset {
            dim,
            values,
            labels: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let dim = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                }
                .at_row(i));
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(dim, values)
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Per-axis `(min, max)` of the cloud.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.rows() {
            for (b, &x) in bb.iter_mut().zip(row) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bb
    }

    /// Keeps the rows for which `keep` holds, with their labels.
    pub fn filter<F: Fn(&[f64]) -> bool>(&self, keep: F) -> Result<Dataset> {
        let mut values = Vec::new();
        let mut labels = self.labels.as_ref().map(|_| Vec::new());
        for (i, row) in self.rows().enumerate() {
            if keep(row) {
                values.extend_from_slice(row);
                if let (Some(out), Some(src)) = (labels.as_mut(), self.labels.as_ref()) {
                    out.push(src[i]);
                }
            }
        }
        let ds = Dataset::from_flat(self.dim, values)?;
        match labels {
            Some(l) => ds.with_labels(l),
            None => Ok(ds),
        }
    }

    /// Concatenates two datasets of the same dimension. Labels survive only
    /// if both sides carry them.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let ds = Dataset::from_flat(self.dim, values)?;
        match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => ds.with_labels(a.iter().chain(b).copied().collect()),
            _ => Ok(ds),
        }
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        Some((coord, &value)) => Err(Error::NonFinite { coord, value }),
        None => Ok(()),
    }
}

/// Which CSV column holds the ground-truth label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim() {
        "1" | "1.0" | "true" | "TRUE" | "True" => Some(true),
        "0" | "0.0" | "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

/// Reads a dataset from CSV. The header row is optional and detected by the
/// presence of a non-numeric cell in the first record.
pub fn read_csv(path: &Path, label: Option<&LabelColumn>) -> Result<Dataset> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_csv(&text, label).map_err(|e| match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        },
        other => other,
    })
}

/// Parses CSV text; see [`read_csv`].
pub fn parse_csv(text: &str, label: Option<&LabelColumn>) -> Result<Dataset> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: "<input>".into(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let has_header = records[0].1.iter().any(|c| c.parse::<f64>().is_err() && parse_label(c).is_none());
    let header: Option<Vec<String>> = if has_header {
        Some(records.remove(0).1.iter().map(str::to_string).collect())
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = records[0].1.len();
    let label_idx = match label {
        None => None,
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(LabelColumn::Index(i)) => {
            return Err(Error::InvalidParameter(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        Some(LabelColumn::Name(name)) => {
            let h = header.as_ref().ok_or_else(|| {
                Error::InvalidParameter(format!("label column '{name}' given but the file has no header"))
            })?;
            Some(h.iter().position(|c| c == name).ok_or_else(|| {
                Error::InvalidParameter(format!("no column named '{name}'"))
            })?)
        }
    };
    let dim = width - label_idx.map_or(0, |_| 1);
    if dim == 0 {
        return Err(Error::InvalidParameter("no coordinate columns".into()));
    }
    let mut values = Vec::with_capacity(records.len() * dim);
    let mut labels = Vec::new();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(parse_err(
                *line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_idx {
                labels.push(
                    parse_label(cell)
                        .ok_or_else(|| parse_err(*line, format!("invalid label '{cell}'")))?,
                );
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(*line, format!("non-numeric cell '{cell}'")))?;
            if !v.is_finite() {
                return Err(parse_err(*line, format!("non-finite cell '{cell}'")));
            }
            values.push(v);
        }
    }
    let ds = Dataset::from_flat(dim, values)?;
    if label_idx.is_some() {
        ds.with_labels(labels)
    } else {
        Ok(ds)
    }
}

/// Writes the dataset as CSV under an `x1..xp[,label]` header.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=ds.dim()).map(|i| format!("x{i}")).collect();
    if ds.labels().is_some() {
        header.push("label".into());
    }
    let io = |e: csv::Error| Error::Io {
        path: "<output>".into(),
        source: e.into(),
    };
    w.write_record(&header).map_err(io)?;
    for (i, row) in ds.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = ds.labels() {
            rec.push(if l[i] { "1" } else { "0" }.into());
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}
