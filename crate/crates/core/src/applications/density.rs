use rayon::prelude::*;
use serde::Serialize;

use crate::christoffel::{ChristoffelModel, RidgePolicy, UniformBoxReference};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Christoffel ratio `Lambda_{mu_n,d} / Lambda_{box,d}` at query points.
///
/// The reference is the uniform probability measure on the box, so the
/// ratio estimates the density relative to it, `vol(box) * h(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub degree: u32,
    pub bounds: Vec<(f64, f64)>,
    pub ratios: Vec<f64>,
    /// Number of data points dropped for lying outside the box.
    pub dropped: usize,
    /// Query indices outside the box (the ratio is still computed).
    pub outside_queries: Vec<usize>,
}

fn inside(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
}

pub fn density_estimate<P: AsRef<[f64]> + Sync>(
    data: &Dataset,
    d: u32,
    bounds: &[(f64, f64)],
    queries: &[P],
    policy: RidgePolicy,
) -> Result<DensityEstimate> {
    if bounds.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: bounds.len(),
        });
    }
    let reference = UniformBoxReference::new(d, bounds)?;
    let kept = data.filter(|x| inside(x, bounds))?;
    if kept.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let model = ChristoffelModel::from_data(&kept, d, true, policy)?;
    let ratios = queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let q = q.as_ref();
            let r = model.lambda(q).and_then(|l| Ok(l / reference.lambda(q)?));
            r.map_err(|e| e.at_row(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let outside_queries = queries
        .iter()
        .enumerate()
        .filter(|(_, q)| !inside(q.as_ref(), bounds))
        .map(|(i, _)| i)
        .collect();
    Ok(DensityEstimate {
        degree: d,
        bounds: bounds.to_vec(),
        ratios,
        dropped: data.len() - kept.len(),
        outside_queries,
    })
}
