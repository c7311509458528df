use super::*;
use crate::basis::MonomialBasis;
use crate::moments::{empirical_moment_matrix, reference_box_moment_matrix};
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_cloud(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    Dataset::from_flat(p, v).unwrap()
}

fn interval_model(d: u32) -> ChristoffelModel {
    fit(&reference_box_moment_matrix(1, d, &[(-1.0, 1.0)]).unwrap(), RidgePolicy::None).unwrap()
}

/// `kappa(x, x)` for the uniform measure on [-1, 1] at d = 2, from the
/// hand-inverted moment matrix [[1,0,1/3],[0,1/3,0],[1/3,0,1/5]]:
/// inverse = [[9/4,0,-15/4],[0,3,0],[-15/4,0,45/4]].
fn kappa_d2_oracle(x: f64) -> f64 {
    9.0 / 4.0 - 2.0 * 15.0 / 4.0 * x * x + 3.0 * x * x + 45.0 / 4.0 * x.powi(4)
}

#[test]
fn hand_cholesky_of_interval_d1() {
    let m = interval_model(1);
    let s3 = 3f64.sqrt();
    assert_relative_eq!(m.cholesky()[(0, 0)], 1.0);
    assert_relative_eq!(m.cholesky()[(1, 0)], 0.0);
    assert_relative_eq!(m.cholesky()[(1, 1)], 1.0 / s3, max_relative = 1e-15);
    assert_relative_eq!(m.orthonormal_coeffs()[(1, 1)], s3, max_relative = 1e-15);
    assert_eq!(m.ridge(), 0.0);
}

#[test]
fn identity_moment_matrix_gives_monomials() {
    let b = MonomialBasis::new(2, 2).unwrap();
    let mm = MomentMatrix::from_matrix(b, DMatrix::identity(6, 6)).unwrap();
    let m = fit(&mm, RidgePolicy::None).unwrap();
    assert_eq!(m.orthonormal_coeffs(), &DMatrix::<f64>::identity(6, 6));
    let x = [0.3, -0.4];
    let v = m.monomials(&x).unwrap();
    assert_relative_eq!(m.kappa_diag(&x).unwrap(), v.iter().map(|a| a * a).sum::<f64>());
}

#[test]
fn single_atom_is_singular_without_ridge() {
    let ds = Dataset::from_rows(&[[0.0, 0.0]]).unwrap();
    let mm = empirical_moment_matrix(&ds, 1, false).unwrap();
    assert!(matches!(fit(&mm, RidgePolicy::None), Err(Error::SingularMatrix { pivot: 1, size: 3 })));
    let ridged = fit(&mm, RidgePolicy::Auto).unwrap();
    assert!(ridged.ridge() > 0.0);
}

#[test]
fn too_few_samples_is_singular() {
    let ds = uniform_cloud(5, 2, 3);
    let mm = empirical_moment_matrix(&ds, 2, true).unwrap();
    assert!(matches!(fit(&mm, RidgePolicy::None), Err(Error::SingularMatrix { .. })));
    assert!(fit(&mm, RidgePolicy::Fixed(1e-3)).is_ok());
}

#[test]
fn ridge_policy_parsing() {
    assert_eq!("none".parse::<RidgePolicy>().unwrap(), RidgePolicy::None);
    assert_eq!("auto".parse::<RidgePolicy>().unwrap(), RidgePolicy::Auto);
    assert_eq!("1e-6".parse::<RidgePolicy>().unwrap(), RidgePolicy::Fixed(1e-6));
    assert!("-1".parse::<RidgePolicy>().is_err());
    assert!("lots".parse::<RidgePolicy>().is_err());
}

#[test]
fn interval_kernel_values() {
    let m1 = interval_model(1);
    for x in [-1.0, -0.3, 0.0, 0.8, 1.7] {
        assert_relative_eq!(m1.kappa_diag(&[x]).unwrap(), 1.0 + 3.0 * x * x, max_relative = 1e-14);
    }
    assert_relative_eq!(m1.lambda(&[0.0]).unwrap(), 1.0, max_relative = 1e-15);

    let m2 = interval_model(2);
    assert_relative_eq!(m2.kappa(&[0.0], &[0.0]).unwrap(), 9.0 / 4.0, max_relative = 1e-14);
    assert_relative_eq!(m2.lambda(&[0.0]).unwrap(), 4.0 / 9.0, max_relative = 1e-14);
    assert_relative_eq!(m2.lambda(&[1.0]).unwrap(), 1.0 / 9.0, max_relative = 1e-14);
    for x in [-0.9, -0.2, 0.5, 1.3] {
        assert_relative_eq!(m2.kappa_diag(&[x]).unwrap(), kappa_d2_oracle(x), max_relative = 1e-13);
    }
}

#[test]
fn kernel_is_symmetric() {
    let ds = uniform_cloud(300, 2, 11);
    let m = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
    let (x, y) = ([0.2, -0.7], [1.5, 0.1]);
    assert_relative_eq!(m.kappa(&x, &y).unwrap(), m.kappa(&y, &x).unwrap(), max_relative = 1e-14);
}

#[test]
fn evaluation_rejects_bad_points() {
    let m = interval_model(2);
    assert!(matches!(m.lambda(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(m.lambda(&[f64::NAN]), Err(Error::NonFinite { .. })));
    let err = m.lambda_batch(&[vec![0.0], vec![f64::INFINITY]], false).unwrap_err();
    assert!(matches!(err, Error::Row { row: 1, .. }));
}

#[test]
fn qp_interval_endpoint() {
    // min over P = a + b X with a + b = 1 of a^2 + b^2 / 3 -> 1/4
    let mm = reference_box_moment_matrix(1, 1, &[(-1.0, 1.0)]).unwrap();
    assert_relative_eq!(lambda_qp(&mm, &[1.0]).unwrap(), 0.25, max_relative = 1e-14);
}

#[test]
fn qp_optimum_is_the_kernel_polynomial() {
    let ds = uniform_cloud(400, 2, 5);
    let mm = empirical_moment_matrix(&ds, 3, true).unwrap();
    let model = fit(&mm, RidgePolicy::None).unwrap();
    let xi = [0.3, 0.6];
    let (_, c_qp) = lambda_qp_solution(&mm, &xi).unwrap();
    let c = model.optimal_polynomial(&xi).unwrap();
    for (a, b) in c_qp.iter().zip(&c) {
        assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn optimal_polynomial_identities() {
    let ds = uniform_cloud(500, 2, 8);
    let model = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
    let n = ds.len() as f64;
    for xi in [[0.1, 0.2], [-0.8, 0.9], [1.4, -0.3]] {
        let c = model.optimal_polynomial(&xi).unwrap();
        let lam = model.lambda(&xi).unwrap();
        assert!((model.eval_polynomial(&c, &xi).unwrap() - 1.0).abs() < 1e-10);
        let vals: Vec<f64> = ds.rows().map(|r| model.eval_polynomial(&c, r).unwrap()).collect();
        let sq = vals.iter().map(|v| v * v).sum::<f64>() / n;
        let lin = vals.iter().sum::<f64>() / n;
        assert_relative_eq!(sq, lam, max_relative = 1e-8);
        assert_relative_eq!(lin, lam, max_relative = 1e-8);
        // moments in model coordinates: int z^alpha P* dmu_n = Lambda(xi) * xi'^alpha
        let xi_std = model.standardization().unwrap().apply(&xi);
        for alpha in model.basis().entries() {
            let lhs = ds
                .rows()
                .zip(&vals)
                .map(|(r, v)| alpha.eval(&model.standardization().unwrap().apply(r)) * v)
                .sum::<f64>()
                / n;
            let rhs = lam * alpha.eval(&xi_std);
            assert!((lhs - rhs).abs() <= 1e-8 * (lam + rhs.abs()), "{alpha}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn orthonormal_polynomials() {
    let m = interval_model(3);
    let p0 = m.orthonormal_polynomial(&Multidegree::new(vec![0])).unwrap();
    assert_relative_eq!(p0[0], 1.0, max_relative = 1e-15);
    assert!(p0[1..].iter().all(|&c| c == 0.0));
    let p1 = m.orthonormal_polynomial(&Multidegree::new(vec![1])).unwrap();
    assert!(p1[0].abs() < 1e-15);
    assert_relative_eq!(p1[1], 3f64.sqrt(), max_relative = 1e-14);
    assert!(m.orthonormal_polynomial(&Multidegree::new(vec![4])).is_err());

    let ds = uniform_cloud(400, 2, 21);
    let model = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
    let vals: Vec<Vec<f64>> = ds.rows().map(|r| model.orthonormal_values(r).unwrap()).collect();
    let s = model.basis_size();
    for a in 0..s {
        assert!(model.orthonormal_coeffs()[(a, a)] > 0.0);
        for b in 0..s {
            let ip = vals.iter().map(|v| v[a] * v[b]).sum::<f64>() / ds.len() as f64;
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-8, "<P{a}, P{b}> = {ip}");
        }
    }
}

#[test]
fn inverse_moment_matrix_identity() {
    let ds = uniform_cloud(600, 2, 2);
    let mm = empirical_moment_matrix(&ds, 2, true).unwrap();
    let model = fit(&mm, RidgePolicy::None).unwrap();
    let d = model.orthonormal_coeffs();
    let lhs = d.transpose() * d;
    let inv = mm.entries().clone().try_inverse().unwrap();
    let rel = (&lhs - &inv).norm() / inv.norm();
    assert!(rel < 1e-8, "{rel}");
}

#[test]
fn orthonormal_polynomials_are_extremal() {
    let ds = uniform_cloud(300, 2, 17);
    let mm = empirical_moment_matrix(&ds, 3, true).unwrap();
    let model = fit(&mm, RidgePolicy::None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let energy = |c: &[f64]| {
        let cv = DVector::from_column_slice(c);
        (cv.transpose() * mm.entries() * &cv)[(0, 0)]
    };
    for (idx, alpha) in model.basis().entries().iter().enumerate().skip(1) {
        let row = model.orthonormal_polynomial(alpha).unwrap();
        let lead = row[idx];
        let monic: Vec<f64> = row.iter().map(|c| c / lead).collect();
        let best = energy(&monic);
        for _ in 0..200 {
            let mut trial = monic.clone();
            for t in trial.iter_mut().take(idx) {
                *t += rng.random_range(-0.5..0.5);
            }
            assert!(energy(&trial) >= best - 1e-12, "{alpha}");
        }
    }
}

#[test]
fn batch_matches_scalar_calls() {
    let ds = uniform_cloud(200, 2, 4);
    let model = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
    let rows: Vec<&[f64]> = ds.rows().collect();
    let par = model.lambda_batch(&rows, true).unwrap();
    let seq = model.lambda_batch(&rows, false).unwrap();
    assert_eq!(par, seq);
    for (r, l) in rows.iter().zip(&par) {
        assert_eq!(model.lambda(r).unwrap(), *l);
    }
    let empty: Vec<Vec<f64>> = Vec::new();
    assert!(model.lambda_batch(&empty, true).unwrap().is_empty());
}

#[test]
fn serialization_round_trip() {
    let ds = uniform_cloud(300, 3, 13);
    let model = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::Auto).unwrap();
    let text = model.to_json().unwrap();
    let back = ChristoffelModel::from_json(&text).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = model.lambda(&x).unwrap();
        let b = back.lambda(&x).unwrap();
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }
    let mut doc = model.to_document();
    doc.cholesky_lower.pop();
    assert!(ChristoffelModel::from_document(&doc).is_err());
}

#[test]
fn lambda_never_exceeds_one() {
    let ds = uniform_cloud(250, 2, 31);
    let model = ChristoffelModel::from_data(&ds, 4, true, RidgePolicy::None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let l = model.lambda(&x).unwrap();
        assert!(l > 0.0 && l <= 1.0 + 1e-12);
    }
}

/// Distance from a point to an axis-aligned box and the box diagonal.
fn box_distance(bb: &[(f64, f64)], x: &[f64]) -> (f64, f64) {
    let dist = bb
        .iter()
        .zip(x)
        .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let diam = bb.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt();
    (dist, diam)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_identity_and_sample_floor(seed in any::<u64>(), p in 1usize..4, d in 1u32..4) {
        let n = 150;
        let ds = uniform_cloud(n, p, seed);
        let model = ChristoffelModel::from_data(&ds, d, true, RidgePolicy::None).unwrap();
        let s = model.basis_size() as f64;
        let mean = model.mean_kappa(&ds).unwrap();
        prop_assert!(((mean - s) / s).abs() <= 1e-6, "{} vs {}", mean, s);
        for l in model.lambda_dataset(&ds, false).unwrap() {
            prop_assert!(l >= 1.0 / n as f64 * (1.0 - 1e-9));
        }
    }

    #[test]
    fn degree_monotonicity(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let ds = uniform_cloud(300, 2, seed);
        let mut prev = f64::INFINITY;
        for d in 0..5 {
            let model = ChristoffelModel::from_data(&ds, d, true, RidgePolicy::None).unwrap();
            let l = model.lambda(&[x, y]).unwrap();
            prop_assert!(l <= prev + 1e-12);
            prev = l;
        }
    }

    #[test]
    fn qp_agrees_with_kernel(seed in any::<u64>(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let ds = uniform_cloud(200, 2, seed);
        let mm = empirical_moment_matrix(&ds, 3, true).unwrap();
        let model = fit(&mm, RidgePolicy::None).unwrap();
        let a = model.lambda(&[x, y]).unwrap();
        let b = lambda_qp(&mm, &[x, y]).unwrap();
        prop_assert!(((a - b) / a).abs() <= 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn decay_bound_outside_bounding_box(seed in any::<u64>(), x in -6.0f64..6.0, y in -6.0f64..6.0) {
        // conv(S) is inside the sample bounding box, so the bound with box
        // distance and box diameter is weaker and still holds.
        let ds = uniform_cloud(200, 2, seed);
        let bb = ds.bounding_box();
        let model = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
        let (dist, diam) = box_distance(&bb, &[x, y]);
        let bound = (diam / (dist + diam)).powi(2);
        prop_assert!(model.lambda(&[x, y]).unwrap() <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn affine_invariance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = uniform_cloud(300, 2, seed ^ 0x55);
        let a = [[rng.random_range(0.5..2.0), rng.random_range(-0.5..0.5)],
                 [rng.random_range(-0.5..0.5), rng.random_range(0.5..2.0)]];
        let b = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let apply = |r: &[f64]| vec![
            a[0][0] * r[0] + a[0][1] * r[1] + b[0],
            a[1][0] * r[0] + a[1][1] * r[1] + b[1],
        ];
        let rows: Vec<Vec<f64>> = ds.rows().map(apply).collect();
        let moved = Dataset::from_rows(&rows).unwrap();
        let m0 = ChristoffelModel::from_data(&ds, 3, true, RidgePolicy::None).unwrap();
        let m1 = ChristoffelModel::from_data(&moved, 3, true, RidgePolicy::None).unwrap();
        for _ in 0..20 {
            let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let l0 = m0.lambda(&x).unwrap();
            let l1 = m1.lambda(&apply(&x)).unwrap();
            prop_assert!(((l0 - l1) / l0).abs() <= 1e-6);
        }
    }
}
