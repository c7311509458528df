use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::christoffel::{ChristoffelModel, RidgePolicy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::moments::AffineMap;

/// Two Christoffel values closer than this (relative) count as a tie.
pub const TIE_REL_TOL: f64 = 1e-10;

/// Rank matching between the points of two clouds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// `permutation[i]` is the point of the second cloud matched to point
    /// `i` of the first.
    pub permutation: Vec<usize>,
    /// Set when either value vector contains a near tie, in which case the
    /// matching between tied points is arbitrary.
    pub tie_flag: bool,
    pub lambda_a: Vec<f64>,
    pub lambda_a_prime: Vec<f64>,
}

fn ranked(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

fn has_tie(values: &[f64], order: &[usize]) -> bool {
    order.windows(2).any(|w| {
        let (a, b) = (values[w[0]], values[w[1]]);
        (b - a).abs() <= TIE_REL_TOL * a.abs().max(b.abs())
    })
}

/// Matches the points of `x` and `x_prime` by the rank of their empirical
/// Christoffel values at degree `d`. Both fits use the same ridge policy.
pub fn affine_match(x: &Dataset, x_prime: &Dataset, d: u32, policy: RidgePolicy) -> Result<MatchResult> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_prime.len(),
        });
    }
    if x.dim() != x_prime.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: x_prime.dim(),
        });
    }
    let la = ChristoffelModel::from_data(x, d, true, policy)?.lambda_dataset(x, true)?;
    let lb = ChristoffelModel::from_data(x_prime, d, true, policy)?.lambda_dataset(x_prime, true)?;
    let ra = ranked(&la);
    let rb = ranked(&lb);
    let mut permutation = vec![0; x.len()];
    for (&i, &j) in ra.iter().zip(&rb) {
        permutation[i] = j;
    }
    Ok(MatchResult {
        tie_flag: has_tie(&la, &ra) || has_tie(&lb, &rb),
        permutation,
        lambda_a: la,
        lambda_a_prime: lb,
    })
}

/// Applies a random well-conditioned affine map (rotation times scales in
/// `[0.5, 2]`, plus a shift) to `data` and shuffles the points.
///
/// Returns the new cloud, the map, and `sigma` with output point `j`
/// equal to the image of input point `sigma[j]`.
pub fn random_affine_shuffle(data: &Dataset, seed: u64) -> Result<(Dataset, AffineMap, Vec<usize>)> {
    let p = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let scales: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
    let a = q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(scales));
    let b: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mut sigma: Vec<usize> = (0..data.len()).collect();
    sigma.shuffle(&mut rng);

    let mut values = Vec::with_capacity(data.len() * p);
    for &src in &sigma {
        let x = data.row(src);
        for i in 0..p {
            values.push(b[i] + (0..p).map(|j| a[(i, j)] * x[j]).sum::<f64>());
        }
    }
    // y = A x + b  written as  y = A (x - shift)  with  shift = -A^{-1} b
    let inv = a.clone().try_inverse().ok_or_else(|| Error::InvalidParameter("affine map is singular".into()))?;
    let shift: Vec<f64> = (0..p).map(|i| -(0..p).map(|j| inv[(i, j)] * b[j]).sum::<f64>()).collect();
    let map = AffineMap {
        shift,
        matrix: (0..p * p).map(|k| a[(k / p, k % p)]).collect(),
    };
    let mut out = Dataset::from_flat(p, values)?;
    if let Some(labels) = data.labels() {
        out = out.with_labels(sigma.iter().map(|&s| labels[s]).collect())?;
    }
    Ok((out, map, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::{synth_generate, SynthSpec};

    fn moons(seed: u64) -> Dataset {
        synth_generate(&SynthSpec::default_for("moon_2d").unwrap(), 200, seed).unwrap()
    }

    #[test]
    fn identity_transform_gives_identity() {
        let x = moons(1);
        let m = affine_match(&x, &x, 3, RidgePolicy::None).unwrap();
        assert_eq!(m.permutation, (0..x.len()).collect::<Vec<_>>());
        assert!(!m.tie_flag);
    }

    #[test]
    fn planted_shuffle_recovered() {
        let x = moons(2);
        let (y, map, sigma) = random_affine_shuffle(&x, 7).unwrap();
        // the reported map reproduces the transformed points
        for (j, &src) in sigma.iter().enumerate() {
            let img = map.apply(x.row(src));
            for (u, v) in img.iter().zip(y.row(j)) {
                assert!((u - v).abs() < 1e-12);
            }
        }
        let m = affine_match(&x, &y, 4, RidgePolicy::None).unwrap();
        assert!(!m.tie_flag);
        for i in 0..x.len() {
            assert_eq!(sigma[m.permutation[i]], i);
        }
    }

    #[test]
    fn coincident_points_raise_tie_flag() {
        let mut rows: Vec<Vec<f64>> = moons(3).rows().map(|r| r.to_vec()).collect();
        rows[5] = rows[17].clone();
        let x = Dataset::from_rows(&rows).unwrap();
        let m = affine_match(&x, &x, 3, RidgePolicy::None).unwrap();
        assert!(m.tie_flag);
        let mut seen = m.permutation.clone();
        seen.sort();
        assert_eq!(seen, (0..x.len()).collect::<Vec<_>>());
    }

    #[test]
    fn size_mismatch_rejected() {
        let x = moons(4);
        let y = x.filter(|r| r[0] > 0.0).unwrap();
        assert!(matches!(affine_match(&x, &y, 2, RidgePolicy::None), Err(Error::DimensionMismatch { .. })));
    }
}
