//! Moment matrices of empirical and reference measures.
//!
//! Entries are kept as a rounded `f64` matrix plus a compensation term, so the
//! factorization can work from moments that are accurate well beyond double
//! precision. Empirical moments are accumulated in a fixed data order.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::MonomialBasis;
use crate::dataset::{check_finite, Dataset};
use crate::dd::Dd;
use crate::error::{Error, Result};

/// Invertible affine map `x -> A (x - shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub shift: Vec<f64>,
    /// `A`, row-major `p x p`.
    pub matrix: Vec<f64>,
}

impl AffineMap {
    pub fn identity(p: usize) -> Self {
        let mut matrix = vec![0.0; p * p];
        for i in 0..p {
            matrix[i * p + i] = 1.0;
        }
        AffineMap {
            shift: vec![0.0; p],
            matrix,
        }
    }

    /// Axis-wise map sending each interval `[lo, hi]` onto `[-1, 1]`.
    /// Zero-width axes are only recentered.
    pub fn box_to_unit(bounds: &[(f64, f64)]) -> Self {
        let p = bounds.len();
        let mut map = AffineMap::identity(p);
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            map.shift[i] = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            map.matrix[i * p + i] = if half > 0.0 { 1.0 / half } else { 1.0 };
        }
        map
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim();
        let centered: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
        (0..p)
            .map(|i| {
                self.matrix[i * p..(i + 1) * p]
                    .iter()
                    .zip(&centered)
                    .map(|(a, c)| a * c)
                    .sum()
            })
            .collect()
    }
}

/// Where a moment matrix came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentSource {
    /// Empirical measure of `n` points.
    Empirical { n: usize },
    /// Uniform probability measure on an axis-aligned box.
    Reference { bounds: Vec<(f64, f64)> },
    /// Supplied directly by the caller.
    Explicit,
}

/// Symmetric matrix of mixed moments `y_{alpha+beta}` indexed by the basis.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    basis: MonomialBasis,
    entries: DMatrix<f64>,
    tail: DMatrix<f64>,
    source: MomentSource,
    standardization: Option<AffineMap>,
}

impl MomentMatrix {
    /// Wraps an explicit symmetric matrix (in raw coordinates).
    pub fn from_matrix(basis: MonomialBasis, entries: DMatrix<f64>) -> Result<Self> {
        let s = basis.len();
        if entries.nrows() != s || entries.ncols() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: entries.nrows(),
            });
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        for i in 0..s {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter("moment matrix is not symmetric".into()));
                }
            }
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("moment matrix has non-finite entries".into()));
        }
        Ok(MomentMatrix {
            basis,
            tail: DMatrix::zeros(s, s),
            entries,
            source: MomentSource::Explicit,
            standardization: None,
        })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Rounded entries.
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn source(&self) -> &MomentSource {
        &self.source
    }

    pub fn standardization(&self) -> Option<&AffineMap> {
        self.standardization.as_ref()
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn dd_entry(&self, i: usize, j: usize) -> Dd {
        Dd::new(self.entries[(i, j)], self.tail[(i, j)])
    }

    /// Pushes a raw point into the coordinates the moments were taken in.
    pub fn to_model_coords(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardization {
            Some(map) => map.apply(x),
            None => x.to_vec(),
        }
    }
}

/// `(1/n) sum_i v_d(x_i) v_d(x_i)^T`, optionally after mapping the cloud's
/// bounding box onto `[-1, 1]^p`.
pub fn empirical_moment_matrix(data: &Dataset, d: u32, standardize: bool) -> Result<MomentMatrix> {
    let basis = MonomialBasis::new(data.dim(), d)?;
    empirical_with_basis(data, basis, standardize)
}

pub fn empirical_with_basis(
    data: &Dataset,
    basis: MonomialBasis,
    standardize: bool,
) -> Result<MomentMatrix> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: data.dim(),
        });
    }
    let map = standardize.then(|| AffineMap::box_to_unit(&data.bounding_box()));
    let s = basis.len();
    let mut acc = vec![Dd::ZERO; s * (s + 1) / 2];
    let mut v = vec![0.0; s];
    for (row_idx, row) in data.rows().enumerate() {
        check_finite(row).map_err(|e| e.at_row(row_idx))?;
        match &map {
            Some(m) => basis.eval_into(&m.apply(row), &mut v),
            None => basis.eval_into(row, &mut v),
        }
        let mut k = 0;
        for i in 0..s {
            for j in 0..=i {
                acc[k] = acc[k] + Dd::from(v[i]) * Dd::from(v[j]);
                k += 1;
            }
        }
    }
    let n = Dd::from(data.len() as f64);
    let mut entries = DMatrix::zeros(s, s);
    let mut tail = DMatrix::zeros(s, s);
    let mut k = 0;
    for i in 0..s {
        for j in 0..=i {
            let m = acc[k] / n;
            entries[(i, j)] = m.hi;
            entries[(j, i)] = m.hi;
            tail[(i, j)] = m.lo;
            tail[(j, i)] = m.lo;
            k += 1;
        }
    }
    Ok(MomentMatrix {
        basis,
        entries,
        tail,
        source: MomentSource::Empirical { n: data.len() },
        standardization: map,
    })
}

/// `int_{-1}^{1} t^k dt / 2`.
fn unit_interval_moment(k: u32) -> Dd {
    if k % 2 == 1 {
        Dd::ZERO
    } else {
        Dd::from(1.0) / Dd::from(k as f64 + 1.0)
    }
}

/// Exact moment matrix of the uniform probability measure on a box.
///
/// Moments are those of the uniform measure on `[-1, 1]^p` and the affine map
/// from the requested box onto that cube is recorded as the standardization,
/// so evaluation at raw points refers to the requested box.
pub fn reference_box_moment_matrix(p: usize, d: u32, bounds: &[(f64, f64)]) -> Result<MomentMatrix> {
    if bounds.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: bounds.len(),
        });
    }
    for (axis, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::DegenerateBox { axis });
        }
    }
    let basis = MonomialBasis::new(p, d)?;
    let s = basis.len();
    let mut entries = DMatrix::zeros(s, s);
    let mut tail = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..=i {
            let a = basis.entries()[i].exponents();
            let b = basis.entries()[j].exponents();
            let m = a
                .iter()
                .zip(b)
                .fold(Dd::from(1.0), |acc, (x, y)| acc * unit_interval_moment(x + y));
            entries[(i, j)] = m.hi;
            entries[(j, i)] = m.hi;
            tail[(i, j)] = m.lo;
            tail[(j, i)] = m.lo;
        }
    }
    Ok(MomentMatrix {
        basis,
        entries,
        tail,
        source: MomentSource::Reference {
            bounds: bounds.to_vec(),
        },
        standardization: Some(AffineMap::box_to_unit(bounds)),
    })
}

/// Smallest eigenvalue of the (rounded) moment matrix.
pub fn psd_check(m: &MomentMatrix) -> f64 {
    SymmetricEigen::new(m.entries.clone()).eigenvalues.min()
}
