//! JSON form of a fitted model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ChristoffelModel;
use crate::basis::MonomialBasis;
use crate::error::{Error, Result};
use crate::moments::{AffineMap, MomentSource};

const FORMAT: &str = "christoffel-model";
const VERSION: u32 = 1;

/// Self-describing model document. The basis is implied by `dimension`,
/// `degree` and glex order; `cholesky_lower` packs the rows of the lower
/// triangle (`1 + 2 + ... + s(d)` values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub dimension: usize,
    pub degree: u32,
    pub basis_size: usize,
    pub basis_order: String,
    pub standardization: Option<AffineMap>,
    pub cholesky_lower: Vec<f64>,
    pub ridge: f64,
    pub source: MomentSource,
}

impl ChristoffelModel {
    pub fn to_document(&self) -> ModelDocument {
        let s = self.basis_size();
        let mut packed = Vec::with_capacity(s * (s + 1) / 2);
        for i in 0..s {
            for j in 0..=i {
                packed.push(self.chol[(i, j)]);
            }
        }
        ModelDocument {
            format: FORMAT.into(),
            version: VERSION,
            dimension: self.dim(),
            degree: self.degree(),
            basis_size: s,
            basis_order: "glex".into(),
            standardization: self.standardization.clone(),
            cholesky_lower: packed,
            ridge: self.ridge,
            source: self.source.clone(),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        if doc.format != FORMAT || doc.version != VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model format {} v{}",
                doc.format, doc.version
            )));
        }
        if doc.basis_order != "glex" {
            return Err(Error::InvalidParameter(format!("unknown basis order '{}'", doc.basis_order)));
        }
        let basis = MonomialBasis::new(doc.dimension, doc.degree)?;
        let s = basis.len();
        if doc.basis_size != s || doc.cholesky_lower.len() != s * (s + 1) / 2 {
            return Err(Error::InvalidParameter("Cholesky factor does not match the basis".into()));
        }
        if let Some(map) = &doc.standardization {
            if map.shift.len() != doc.dimension || map.matrix.len() != doc.dimension * doc.dimension {
                return Err(Error::InvalidParameter("standardization map has wrong shape".into()));
            }
        }
        let mut chol = DMatrix::zeros(s, s);
        let mut k = 0;
        for i in 0..s {
            for j in 0..=i {
                chol[(i, j)] = doc.cholesky_lower[k];
                k += 1;
            }
            if !(chol[(i, i)] > 0.0) {
                return Err(Error::InvalidParameter("Cholesky diagonal must be positive".into()));
            }
        }
        Ok(ChristoffelModel::from_parts(
            basis,
            chol,
            doc.standardization.clone(),
            doc.ridge,
            doc.source.clone(),
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}
