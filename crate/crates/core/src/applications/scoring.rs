use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::christoffel::{ChristoffelModel, RidgePolicy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// How a set of outlyingness scores was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ScoreMethod {
    /// `kappa(x_i, x_i)` of the degree-`degree` empirical model.
    Christoffel { degree: u32, ridge: f64 },
    /// Negated Gaussian kernel density with bandwidth `sigma`.
    Kde { sigma: f64 },
    /// Scores read from a file.
    External { name: String },
}

/// A dataset with one score per point; higher means more outlying.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    pub dataset: Dataset,
    pub scores: Vec<f64>,
    pub method: ScoreMethod,
}

impl ScoredDataset {
    pub fn new(dataset: Dataset, scores: Vec<f64>, method: ScoreMethod) -> Result<Self> {
        if scores.len() != dataset.len() {
            return Err(Error::DimensionMismatch {
                expected: dataset.len(),
                got: scores.len(),
            });
        }
        if let Some((i, &v)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { coord: 0, value: v }.at_row(i));
        }
        Ok(ScoredDataset {
            dataset,
            scores,
            method,
        })
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.dataset.labels()
    }
}

/// Scores every point by `kappa(x_i, x_i)` of the model fitted on the whole
/// dataset.
pub fn outlier_scores(data: &Dataset, d: u32, standardize: bool, policy: RidgePolicy) -> Result<ScoredDataset> {
    let model = ChristoffelModel::from_data(data, d, standardize, policy)?;
    let rows: Vec<&[f64]> = data.rows().collect();
    let scores = model.kappa_batch(&rows, true)?;
    ScoredDataset::new(
        data.clone(),
        scores,
        ScoreMethod::Christoffel {
            degree: d,
            ridge: model.ridge(),
        },
    )
}

/// `-(1/n) sum_j exp(-|x_i - x_j|^2 / (2 sigma^2))` for every point.
pub fn kde_scores(data: &Dataset, sigma: f64) -> Result<ScoredDataset> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {sigma}")));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let scale = 1.0 / (2.0 * sigma * sigma);
    let scores = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let sum: f64 = data
                .rows()
                .map(|y| {
                    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                    (-d2 * scale).exp()
                })
                .sum();
            -sum / n
        })
        .collect();
    ScoredDataset::new(data.clone(), scores, ScoreMethod::Kde { sigma })
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    index: usize,
    score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
}

/// Writes `index,score[,label]` rows.
pub fn write_scores<W: Write>(scored: &ScoredDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let labels = scored.labels();
    for (i, &score) in scored.scores.iter().enumerate() {
        w.serialize(ScoreRow {
            index: i,
            score,
            label: labels.map(|l| u8::from(l[i])),
        })
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| io_err(e.into()))
}

fn io_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<scores>".into(),
        source: std::io::Error::other(e),
    }
}

/// Reads `index,score[,label]` rows, returned in index order.
pub fn read_scores<R: Read>(input: R, name: &str) -> Result<(Vec<f64>, Option<Vec<bool>>)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut rows: Vec<ScoreRow> = Vec::new();
    for (k, rec) in r.deserialize().enumerate() {
        let row: ScoreRow = rec.map_err(|e| Error::Parse {
            path: name.into(),
            line: k + 2,
            msg: e.to_string(),
        })?;
        if let Some(l) = row.label {
            if l > 1 {
                return Err(Error::Parse {
                    path: name.into(),
                    line: k + 2,
                    msg: format!("label must be 0 or 1, got {l}"),
                });
            }
        }
        rows.push(row);
    }
    rows.sort_by_key(|r| r.index);
    if rows.iter().enumerate().any(|(i, r)| r.index != i) {
        return Err(Error::Parse {
            path: name.into(),
            line: 0,
            msg: "indices must be 0..n without gaps or repeats".into(),
        });
    }
    let labels = if rows.iter().all(|r| r.label.is_some()) && !rows.is_empty() {
        Some(rows.iter().map(|r| r.label == Some(1)).collect())
    } else {
        None
    };
    Ok((rows.iter().map(|r| r.score).collect(), labels))
}
