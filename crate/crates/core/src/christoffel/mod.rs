//! Christoffel function of a measure given by its moment matrix.
//!
//! With `M_d = L L^T` the Cholesky factorization of the moment matrix, the
//! rows of `D = L^{-1}` hold the coefficients of the orthonormal polynomials
//! `P_alpha` (glex Gram-Schmidt), `M_d^{-1} = D^T D` and
//!
//! ```text
//! kappa(x, y) = v_d(x)^T M_d^{-1} v_d(y) = <L^{-1} v_d(x), L^{-1} v_d(y)>
//! Lambda(x)   = 1 / kappa(x, x)
//! ```
//!
//! The factorization runs in double-double arithmetic from compensated
//! moments and the factor is rounded once; evaluation uses `f64` forward
//! substitution.

mod legendre;
mod serial;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{Multidegree, MonomialBasis};
use crate::dataset::{check_finite, Dataset};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::moments::{AffineMap, MomentMatrix, MomentSource};

pub use legendre::{legendre_values, UniformBoxReference};
pub use serial::ModelDocument;

/// A pivot smaller than this fraction of the largest diagonal entry is
/// treated as zero.
pub const PIVOT_REL_TOL: f64 = 1e-14;

/// Number of ×10 escalations tried by [`RidgePolicy::Auto`].
pub const RIDGE_ESCALATIONS: u32 = 16;

/// How to regularize a (nearly) singular moment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RidgePolicy {
    /// Fail on a singular matrix.
    None,
    /// Always add `eps * I`.
    Fixed(f64),
    /// Try without ridge, then `1e-12 * trace / s(d)` escalating by ×10.
    #[default]
    Auto,
}

impl std::str::FromStr for RidgePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "0" => Ok(RidgePolicy::None),
            "auto" => Ok(RidgePolicy::Auto),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(RidgePolicy::Fixed)
                .ok_or_else(|| Error::InvalidParameter(format!("invalid ridge '{other}'"))),
        }
    }
}

/// Fitted factorization of a moment matrix.
#[derive(Debug, Clone)]
pub struct ChristoffelModel {
    basis: MonomialBasis,
    chol: DMatrix<f64>,
    orthonormal: DMatrix<f64>,
    standardization: Option<AffineMap>,
    ridge: f64,
    source: MomentSource,
}

/// Cholesky factorization of `M + ridge * I` in double-double arithmetic.
fn cholesky_dd(m: &MomentMatrix, ridge: f64) -> Result<Vec<Dd>> {
    let s = m.size();
    let ridge = Dd::from(ridge);
    let max_diag = (0..s)
        .map(|i| m.entries()[(i, i)])
        .fold(0.0f64, f64::max)
        + ridge.hi;
    let tol = PIVOT_REL_TOL * max_diag;
    let mut l = vec![Dd::ZERO; s * s];
    for j in 0..s {
        let mut diag = m.dd_entry(j, j) + ridge;
        for k in 0..j {
            diag = diag - l[j * s + k] * l[j * s + k];
        }
        if !(diag.hi > tol) || !diag.hi.is_finite() {
            return Err(Error::SingularMatrix { pivot: j, size: s });
        }
        let ljj = diag.sqrt();
        l[j * s + j] = ljj;
        for i in j + 1..s {
            let mut acc = m.dd_entry(i, j);
            for k in 0..j {
                acc = acc - l[i * s + k] * l[j * s + k];
            }
            l[i * s + j] = acc / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular `f64` matrix, accumulated in double-double.
fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let s = l.nrows();
    let mut inv = DMatrix::zeros(s, s);
    for col in 0..s {
        // solve L x = e_col
        let mut x = vec![Dd::ZERO; s];
        for i in col..s {
            let mut acc = if i == col { Dd::from(1.0) } else { Dd::ZERO };
            for k in col..i {
                acc = acc - Dd::from(l[(i, k)]) * x[k];
            }
            x[i] = acc / Dd::from(l[(i, i)]);
            inv[(i, col)] = x[i].to_f64();
        }
    }
    inv
}

/// Fits a model from a moment matrix.
pub fn fit(m: &MomentMatrix, policy: RidgePolicy) -> Result<ChristoffelModel> {
    let (factor, ridge) = match policy {
        RidgePolicy::None => (cholesky_dd(m, 0.0)?, 0.0),
        RidgePolicy::Fixed(eps) => (cholesky_dd(m, eps)?, eps),
        RidgePolicy::Auto => match cholesky_dd(m, 0.0) {
            Ok(f) => (f, 0.0),
            Err(Error::SingularMatrix { .. }) => {
                let trace: f64 = m.entries().diagonal().sum();
                let mut eps = 1e-12 * trace / m.size() as f64;
                let mut found = None;
                for _ in 0..RIDGE_ESCALATIONS {
                    if let Ok(f) = cholesky_dd(m, eps) {
                        found = Some((f, eps));
                        break;
                    }
                    eps *= 10.0;
                }
                found.ok_or(Error::RidgeExhausted { ridge: eps / 10.0 })?
            }
            Err(e) => return Err(e),
        },
    };
    let s = m.size();
    let chol = DMatrix::from_fn(s, s, |i, j| if j <= i { factor[i * s + j].to_f64() } else { 0.0 });
    Ok(ChristoffelModel::from_parts(
        m.basis().clone(),
        chol,
        m.standardization().cloned(),
        ridge,
        m.source().clone(),
    ))
}

impl ChristoffelModel {
    pub(crate) fn from_parts(
        basis: MonomialBasis,
        chol: DMatrix<f64>,
        standardization: Option<AffineMap>,
        ridge: f64,
        source: MomentSource,
    ) -> Self {
        let orthonormal = lower_inverse(&chol);
        ChristoffelModel {
            basis,
            chol,
            orthonormal,
            standardization,
            ridge,
            source,
        }
    }

    /// Fits the empirical model of a dataset.
    pub fn from_data(data: &Dataset, d: u32, standardize: bool, policy: RidgePolicy) -> Result<Self> {
        let m = crate::moments::empirical_moment_matrix(data, d, standardize)?;
        fit(&m, policy)
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    /// `s(d)`.
    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }

    /// Lower-triangular Cholesky factor `L` of the (ridged) moment matrix.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `D = L^{-1}`; row `alpha` holds the coefficients of `P_alpha`.
    pub fn orthonormal_coeffs(&self) -> &DMatrix<f64> {
        &self.orthonormal
    }

    pub fn standardization(&self) -> Option<&AffineMap> {
        self.standardization.as_ref()
    }

    /// Ridge actually added to the moment matrix (0 if none).
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn source(&self) -> &MomentSource {
        &self.source
    }

    /// Rough condition number of `M`, `(max L_ii / min L_ii)^2`.
    pub fn condition_estimate(&self) -> f64 {
        let diag = self.chol.diagonal();
        (diag.max() / diag.min()).powi(2)
    }

    fn model_coords(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        check_finite(x)?;
        Ok(match &self.standardization {
            Some(map) => map.apply(x),
            None => x.to_vec(),
        })
    }

    /// `v_d` at a raw point, in model coordinates.
    pub fn monomials(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.model_coords(x)?;
        let mut v = vec![0.0; self.basis_size()];
        self.basis.eval_into(&z, &mut v);
        Ok(v)
    }

    /// Solves `L a = v` in place.
    fn forward(&self, v: &mut [f64]) {
        let s = v.len();
        for i in 0..s {
            let mut acc = v[i];
            for k in 0..i {
                acc -= self.chol[(i, k)] * v[k];
            }
            v[i] = acc / self.chol[(i, i)];
        }
    }

    /// Solves `L^T a = v` in place.
    fn backward(&self, v: &mut [f64]) {
        let s = v.len();
        for i in (0..s).rev() {
            let mut acc = v[i];
            for k in i + 1..s {
                acc -= self.chol[(k, i)] * v[k];
            }
            v[i] = acc / self.chol[(i, i)];
        }
    }

    /// Values `(P_alpha(x))_alpha` of the orthonormal polynomials.
    pub fn orthonormal_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.monomials(x)?;
        self.forward(&mut v);
        Ok(v)
    }

    /// Reproducing kernel `kappa(x, y)`.
    pub fn kappa(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let a = self.orthonormal_values(x)?;
        let b = self.orthonormal_values(y)?;
        Ok(a.iter().zip(&b).map(|(u, v)| u * v).sum())
    }

    /// `kappa(x, x)`.
    pub fn kappa_diag(&self, x: &[f64]) -> Result<f64> {
        let a = self.orthonormal_values(x)?;
        Ok(a.iter().map(|u| u * u).sum())
    }

    /// Christoffel function `Lambda(x) = 1 / kappa(x, x)`.
    pub fn lambda(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.kappa_diag(x)?)
    }

    /// `s(d) * Lambda(x)`.
    pub fn scaled_lambda(&self, x: &[f64]) -> Result<f64> {
        Ok(self.basis_size() as f64 * self.lambda(x)?)
    }

    /// Elementwise [`lambda`](Self::lambda); errors carry the row index.
    pub fn lambda_batch<P: AsRef<[f64]> + Sync>(&self, points: &[P], parallel: bool) -> Result<Vec<f64>> {
        self.map_batch(points, parallel, |x| self.lambda(x))
    }

    /// Elementwise [`kappa_diag`](Self::kappa_diag).
    pub fn kappa_batch<P: AsRef<[f64]> + Sync>(&self, points: &[P], parallel: bool) -> Result<Vec<f64>> {
        self.map_batch(points, parallel, |x| self.kappa_diag(x))
    }

    pub fn lambda_dataset(&self, data: &Dataset, parallel: bool) -> Result<Vec<f64>> {
        let rows: Vec<&[f64]> = data.rows().collect();
        self.lambda_batch(&rows, parallel)
    }

    fn map_batch<P, F>(&self, points: &[P], parallel: bool, f: F) -> Result<Vec<f64>>
    where
        P: AsRef<[f64]> + Sync,
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let one = |(i, p): (usize, &P)| f(p.as_ref()).map_err(|e| e.at_row(i));
        if parallel {
            points.par_iter().enumerate().map(one).collect()
        } else {
            points.iter().enumerate().map(one).collect()
        }
    }

    /// `(1/n) sum_i kappa(x_i, x_i)`, summed in index order. Equals `s(d)` on
    /// the fit sample when no ridge was applied.
    pub fn mean_kappa(&self, data: &Dataset) -> Result<f64> {
        let rows: Vec<&[f64]> = data.rows().collect();
        let k = self.kappa_batch(&rows, true)?;
        Ok(k.iter().sum::<f64>() / k.len() as f64)
    }

    /// Coefficients (model coordinates) of the minimizer
    /// `P*(X) = Lambda(xi) kappa(X, xi)` of `int P^2 dmu` subject to `P(xi) = 1`.
    pub fn optimal_polynomial(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.orthonormal_values(xi)?;
        let kappa: f64 = c.iter().map(|u| u * u).sum();
        self.backward(&mut c);
        for v in &mut c {
            *v /= kappa;
        }
        Ok(c)
    }

    /// Coefficients of the orthonormal polynomial `P_alpha`.
    pub fn orthonormal_polynomial(&self, alpha: &Multidegree) -> Result<Vec<f64>> {
        let i = self
            .basis
            .index_of(alpha)
            .ok_or_else(|| Error::NotInBasis(alpha.exponents().to_vec()))?;
        Ok(self.orthonormal.row(i).iter().copied().collect())
    }

    /// Evaluates a polynomial given by model-coordinate coefficients at a raw
    /// point.
    pub fn eval_polynomial(&self, coeffs: &[f64], x: &[f64]) -> Result<f64> {
        if coeffs.len() != self.basis_size() {
            return Err(Error::DimensionMismatch {
                expected: self.basis_size(),
                got: coeffs.len(),
            });
        }
        let v = self.monomials(x)?;
        Ok(v.iter().zip(coeffs).map(|(a, b)| a * b).sum())
    }
}

/// Anything that evaluates a Christoffel function pointwise.
pub trait LambdaEval: Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> u32;
    /// `s(d)`.
    fn basis_size(&self) -> f64;
    fn lambda_at(&self, x: &[f64]) -> Result<f64>;
}

impl LambdaEval for ChristoffelModel {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn degree(&self) -> u32 {
        self.basis.degree()
    }
    fn basis_size(&self) -> f64 {
        self.basis.len() as f64
    }
    fn lambda_at(&self, x: &[f64]) -> Result<f64> {
        self.lambda(x)
    }
}

impl LambdaEval for UniformBoxReference {
    fn dim(&self) -> usize {
        UniformBoxReference::dim(self)
    }
    fn degree(&self) -> u32 {
        UniformBoxReference::degree(self)
    }
    fn basis_size(&self) -> f64 {
        UniformBoxReference::basis_size(self)
    }
    fn lambda_at(&self, x: &[f64]) -> Result<f64> {
        self.lambda(x)
    }
}

/// Christoffel function through the quadratic program
/// `min c^T M c  s.t.  c^T v_d(x) = 1`, solved from its KKT system.
///
/// Returns the optimal value and the optimal coefficients (model
/// coordinates). Independent of the Cholesky path.
pub fn lambda_qp_solution(m: &MomentMatrix, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let s = m.size();
    let v = m.basis().eval(&m.to_model_coords(x))?;
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    for i in 0..s {
        for j in 0..s {
            kkt[(i, j)] = 2.0 * m.entries()[(i, j)];
        }
        kkt[(i, s)] = -v[i];
        kkt[(s, i)] = v[i];
    }
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let sol = kkt.full_piv_lu().solve(&rhs).ok_or(Error::SingularKkt)?;
    let c: Vec<f64> = sol.iter().take(s).copied().collect();
    let cv = DVector::from_column_slice(&c);
    let value = (cv.transpose() * m.entries() * &cv)[(0, 0)];
    if !value.is_finite() {
        return Err(Error::SingularKkt);
    }
    Ok((value, c))
}

/// Optimal value of [`lambda_qp_solution`].
pub fn lambda_qp(m: &MomentMatrix, x: &[f64]) -> Result<f64> {
    lambda_qp_solution(m, x).map(|(v, _)| v)
}

#[cfg(test)]
mod tests;
