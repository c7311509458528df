//! Multivariate monomial basis in graded lexicographic (glex) order.
//!
//! Monomials are ordered by total degree first. Ties are broken
//! lexicographically with `X1` the most significant variable, so for two
//! variables and degree 3 the order is
//! `1, X1, X2, X1^2, X1 X2, X2^2, X1^3, X1^2 X2, X1 X2^2, X2^3`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of monomials in a basis.
pub const DEFAULT_BASIS_CAP: usize = 20_000;

/// Exponent tuple `alpha` of the monomial `X^alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multidegree(Vec<u32>);

impl Multidegree {
    pub fn new(exponents: Vec<u32>) -> Self {
        Multidegree(exponents)
    }

    pub fn zero(p: usize) -> Self {
        Multidegree(vec![0; p])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Exponent-wise sum, i.e. the multidegree of `X^a * X^b`.
    pub fn add(&self, other: &Multidegree) -> Result<Multidegree> {
        check_same_dim(self, other)?;
        Ok(Multidegree(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Evaluates `x^alpha`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "X{}", i + 1)?;
            } else {
                write!(f, "X{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

fn check_same_dim(a: &Multidegree, b: &Multidegree) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Compares two multidegrees in glex order.
pub fn glex_compare(a: &Multidegree, b: &Multidegree) -> Result<Ordering> {
    check_same_dim(a, b)?;
    Ok(glex_cmp_unchecked(a, b))
}

fn glex_cmp_unchecked(a: &Multidegree, b: &Multidegree) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        // larger power of the leading variable sorts first
        for (x, y) in a.0.iter().zip(&b.0) {
            match y.cmp(x) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    })
}

/// `C(p + d, d)`, or `None` on overflow.
pub fn basis_size(p: usize, d: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for k in 1..=d as u128 {
        acc = acc.checked_mul(p as u128 + k)?;
        acc /= k;
    }
    Some(acc)
}

/// All monomials of degree at most `d` in `p` variables, sorted by glex.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    dim: usize,
    degree: u32,
    entries: Vec<Multidegree>,
}

impl MonomialBasis {
    pub fn new(p: usize, d: u32) -> Result<Self> {
        Self::with_cap(p, d, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(p: usize, d: u32, cap: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let size = basis_size(p, d).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::BasisTooLarge { size, cap });
        }
        let mut entries = Vec::with_capacity(size as usize);
        let mut scratch = vec![0u32; p];
        for k in 0..=d {
            push_compositions(k, 0, &mut scratch, &mut entries);
        }
        debug_assert_eq!(entries.len() as u128, size);
        Ok(MonomialBasis {
            dim: p,
            degree: d,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `s(d)`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Multidegree] {
        &self.entries
    }

    pub fn index_of(&self, alpha: &Multidegree) -> Option<usize> {
        if alpha.dim() != self.dim || alpha.degree() > self.degree {
            return None;
        }
        self.entries
            .binary_search_by(|e| glex_cmp_unchecked(e, alpha))
            .ok()
    }

    /// Vector of monomials `v_d(x)`, validated.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some((coord, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { coord, value });
        }
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a caller buffer of length `s(d)`.
    pub(crate) fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.degree as usize;
        // powers[i * (d + 1) + k] = x_i^k
        let mut powers = vec![1.0; self.dim * (d + 1)];
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut powers[i * (d + 1)..(i + 1) * (d + 1)];
            for k in 1..=d {
                row[k] = row[k - 1] * xi;
            }
        }
        for (slot, alpha) in out.iter_mut().zip(&self.entries) {
            *slot = alpha
                .0
                .iter()
                .enumerate()
                .map(|(i, &e)| powers[i * (d + 1) + e as usize])
                .product();
        }
    }
}

/// Appends all exponent vectors of total degree `remaining` over variables
/// `var..`, leading variable descending.
fn push_compositions(remaining: u32, var: usize, scratch: &mut [u32], out: &mut Vec<Multidegree>) {
    let p = scratch.len();
    if var == p - 1 {
        scratch[var] = remaining;
        out.push(Multidegree(scratch.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        scratch[var] = e;
        push_compositions(remaining - e, var + 1, scratch, out);
    }
    scratch[var] = 0;
}

/// Convenience wrapper with the default cap.
pub fn enumerate_basis(p: usize, d: u32) -> Result<MonomialBasis> {
    MonomialBasis::new(p, d)
}

/// `v_d(x)` for the given basis.
pub fn eval_monomial_vector(basis: &MonomialBasis, x: &[f64]) -> Result<Vec<f64>> {
    basis.eval(x)
}
