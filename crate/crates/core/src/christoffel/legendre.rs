//! Closed-form Christoffel functions of uniform measures on boxes.
//!
//! Products of normalized Legendre polynomials `sqrt(2k+1) P_k` with total
//! degree at most `d` form an orthonormal basis of the degree-`d` polynomials
//! for the uniform probability measure on `[-1, 1]^p`, so
//! `kappa_d(x, x) = sum_{|a| <= d} prod_i (2 a_i + 1) P_{a_i}(x_i)^2`.
//! This path uses only the three-term recurrence and stays accurate at
//! degrees where the monomial Gram matrix is hopelessly ill-conditioned.

use crate::error::{Error, Result};
use crate::moments::AffineMap;

/// `P_0(x), ..., P_d(x)` by the three-term recurrence.
pub fn legendre_values(d: u32, x: f64) -> Vec<f64> {
    let d = d as usize;
    let mut p = Vec::with_capacity(d + 1);
    p.push(1.0);
    if d >= 1 {
        p.push(x);
    }
    for k in 1..d {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p
}

/// Exact Christoffel function of the uniform probability measure on a box.
#[derive(Debug, Clone)]
pub struct UniformBoxReference {
    degree: u32,
    bounds: Vec<(f64, f64)>,
    map: AffineMap,
}

impl UniformBoxReference {
    pub fn new(degree: u32, bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter("box needs at least one axis".into()));
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::DegenerateBox { axis });
            }
        }
        Ok(UniformBoxReference {
            degree,
            bounds: bounds.to_vec(),
            map: AffineMap::box_to_unit(bounds),
        })
    }

    /// Uniform probability measure on `[-1, 1]`.
    pub fn unit_interval(degree: u32) -> Self {
        Self::new(degree, &[(-1.0, 1.0)]).expect("valid interval")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// `s(d) = C(p + d, d)` as a float.
    pub fn basis_size(&self) -> f64 {
        crate::basis::basis_size(self.dim(), self.degree).map_or(f64::INFINITY, |s| s as f64)
    }

    pub fn kappa_diag(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        crate::dataset::check_finite(x)?;
        let z = self.map.apply(x);
        let d = self.degree as usize;
        // by_degree[t] = sum over multi-indices of the axes seen so far with total degree t
        let mut by_degree = vec![0.0; d + 1];
        by_degree[0] = 1.0;
        for &zi in &z {
            let w: Vec<f64> = legendre_values(self.degree, zi)
                .iter()
                .enumerate()
                .map(|(k, p)| (2 * k + 1) as f64 * p * p)
                .collect();
            let mut next = vec![0.0; d + 1];
            for t in 0..=d {
                for k in 0..=t {
                    next[t] += by_degree[t - k] * w[k];
                }
            }
            by_degree = next;
        }
        Ok(by_degree.iter().sum())
    }

    pub fn lambda(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.kappa_diag(x)?)
    }

    pub fn scaled_lambda(&self, x: &[f64]) -> Result<f64> {
        Ok(self.basis_size() * self.lambda(x)?)
    }
}
