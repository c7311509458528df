//! Acceptance gate. Runs every criterion in sequence, prints one
//! PASS/FAIL line per criterion, and exits nonzero if any fails.
//!
//! Criterion 10 uses a user-supplied labelled CSV when
//! `CHRISTOFFEL_KDD_CSV` is set (label column from `CHRISTOFFEL_KDD_LABEL`,
//! default `label`); otherwise it runs the synthetic substitute.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use christoffel::applications::{
    affine_match, outlier_scores, pr_curve, pr_curve_scored, random_affine_shuffle, synth_generate, SynthSpec,
};
use christoffel::basis::basis_size;
use christoffel::bounds::{
    alpha_threshold, lower_bound_inside, needle_polynomial, upper_bound_outside, GeometryDescriptor,
};
use christoffel::support::{estimate_support, sup_grid_deviation, Grid};
use christoffel::{
    fit, lambda_qp, reference_box_moment_matrix, ChristoffelModel, Dataset, LabelColumn, RidgePolicy,
    UniformBoxReference,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn interval() -> GeometryDescriptor {
    GeometryDescriptor::new(1, 2.0, 2.0).unwrap()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let values: Vec<f64> = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Dataset::from_flat(p, values).unwrap()
}

fn c1_exact_model_oracle() -> Outcome {
    let xs: Vec<f64> = (-9..=9).map(|k| k as f64 / 10.0).collect();
    let mut worst = 0.0f64;
    for d in 0..=15 {
        let m = reference_box_moment_matrix(1, d, &[(-1.0, 1.0)]).unwrap();
        let model = fit(&m, RidgePolicy::None).unwrap();
        let exact = UniformBoxReference::unit_interval(d);
        for &x in &xs {
            let a = model.lambda(&[x]).unwrap();
            let b = exact.lambda(&[x]).unwrap();
            worst = worst.max((a - b).abs() / b);
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation {worst:.3e} (tol 1e-8)"))
}

fn c2_density_limit() -> Outcome {
    let v = 50.0 * UniformBoxReference::unit_interval(50).lambda(&[0.0]).unwrap();
    let rel = (v - PI / 2.0).abs() / (PI / 2.0);
    outcome(rel <= 0.05, format!("d*Lambda(0) = {v:.6}, relative gap to pi/2 {rel:.4} (tol 0.05)"))
}

fn c3_bound_sandwich() -> Outcome {
    let g = interval();
    let mut fails = Vec::new();
    for d in 2..=60u32 {
        let s = basis_size(1, d).unwrap() as f64;
        let v = s * UniformBoxReference::unit_interval(d).lambda(&[0.0]).unwrap();
        if v < lower_bound_inside(d, 0.5, &g) {
            fails.push(format!("inside d={d}"));
        }
    }
    for d in 20..=100u32 {
        let s = basis_size(1, d).unwrap() as f64;
        let v = s * UniformBoxReference::unit_interval(d).lambda(&[1.5]).unwrap();
        if v > upper_bound_outside(d, 0.5, &g) {
            fails.push(format!("outside d={d}"));
        }
    }
    outcome(fails.is_empty(), format!("violations: {fails:?}"))
}

fn c4_needle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let center = [0.0, 0.0];
    let mut worst_center = 0.0f64;
    let mut violations = 0usize;
    for d in [5u32, 20, 50] {
        for delta in [0.2, 0.5] {
            worst_center = worst_center.max((needle_polynomial(d, delta, &center, &center).unwrap() - 1.0).abs());
            let far = 2f64.powf(1.0 - delta * d as f64);
            let mut drawn = 0;
            while drawn < 10_000 {
                let y = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
                let r = f64::hypot(y[0], y[1]);
                if r > 1.0 {
                    continue;
                }
                drawn += 1;
                let q = needle_polynomial(d, delta, &center, &y).unwrap();
                if q.abs() > 1.0 + 1e-12 || (r >= delta && q.abs() > far * (1.0 + 1e-12)) {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        worst_center <= 1e-10 && violations == 0,
        format!("|q(x) - 1| max {worst_center:.1e} (tol 1e-10), bound violations {violations} of 60000"),
    )
}

fn c5_trace_and_floor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_trace, mut floor_ok, mut failures) = (0.0f64, true, 0);
    for _ in 0..20 {
        let n = rng.random_range(200..=2000);
        let p = rng.random_range(1..=3usize);
        let d = rng.random_range(2..=4u32);
        let data = random_cloud(&mut rng, n, p);
        let model = match ChristoffelModel::from_data(&data, d, true, RidgePolicy::None) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let s = model.basis_size() as f64;
        worst_trace = worst_trace.max((model.mean_kappa(&data).unwrap() - s).abs() / s);
        let lambda = model.lambda_dataset(&data, true).unwrap();
        let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        floor_ok &= min >= 1.0 / n as f64;
    }
    outcome(
        worst_trace <= 1e-6 && floor_ok && failures == 0,
        format!("trace deviation {worst_trace:.2e} (tol 1e-6), sample floor held: {floor_ok}, fit failures {failures}"),
    )
}

fn ranks(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

fn c6_affine_invariance() -> Outcome {
    let data = synth_generate(&SynthSpec::default_for("moon_2d").unwrap(), 500, 6).unwrap();
    let d = 4;
    let base = ChristoffelModel::from_data(&data, d, true, RidgePolicy::None).unwrap();
    let base_scores = outlier_scores(&data, d, true, RidgePolicy::None).unwrap().scores;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let probes: Vec<[f64; 2]> = (0..200)
        .map(|_| [rng.random_range(-1.5..2.5), rng.random_range(-1.0..1.5)])
        .collect();
    let mut worst = 0.0f64;
    let mut ranks_equal = true;
    for seed in 0..10 {
        let (moved, map, sigma) = random_affine_shuffle(&data, 600 + seed).unwrap();
        let model = ChristoffelModel::from_data(&moved, d, true, RidgePolicy::None).unwrap();
        for x in probes.iter().map(|p| p.as_slice()).chain(data.rows()) {
            let a = base.lambda(x).unwrap();
            let b = model.lambda(&map.apply(x)).unwrap();
            worst = worst.max((a - b).abs() / a);
        }
        // undo the shuffle before comparing score ranks
        let moved_scores = outlier_scores(&moved, d, true, RidgePolicy::None).unwrap().scores;
        let mut aligned = vec![0.0; data.len()];
        for (j, &src) in sigma.iter().enumerate() {
            aligned[src] = moved_scores[j];
        }
        ranks_equal &= ranks(&aligned) == ranks(&base_scores);
    }
    outcome(
        worst <= 1e-6 && ranks_equal,
        format!("max relative Lambda deviation {worst:.2e} (tol 1e-6), score ranks identical: {ranks_equal}"),
    )
}

fn c7_qp_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for (p, d) in [(1usize, 4u32), (2, 3), (2, 4), (3, 2)] {
        let data = random_cloud(&mut rng, 800, p);
        let m = christoffel::empirical_moment_matrix(&data, d, true).unwrap();
        let model = fit(&m, RidgePolicy::None).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let a = model.lambda(&x).unwrap();
            let b = lambda_qp(&m, &x).unwrap();
            worst = worst.max((a - b).abs() / a);
        }
    }
    outcome(worst <= 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)"))
}

fn c8_support_recovery() -> Outcome {
    let geom = GeometryDescriptor::new(2, 2.0, PI).unwrap();
    let (d, delta) = (6, 0.5);
    let alpha = alpha_threshold(d, delta, &geom, false).unwrap();
    let grid = Grid::square(2, -2.0, 2.0, 200).unwrap();
    let spec = SynthSpec::default_for("uniform_disk").unwrap();
    let mut passed = 0;
    let mut notes = Vec::new();
    for seed in 0..5 {
        let data = synth_generate(&spec, 5000, seed).unwrap();
        let model = ChristoffelModel::from_data(&data, d, true, RidgePolicy::None).unwrap();
        let est = estimate_support(&model, &grid, alpha).unwrap();
        let (mut missing, mut extra) = (0, 0);
        for i in 0..grid.len() {
            let x = grid.node(i);
            let r = f64::hypot(x[0], x[1]);
            if r <= 1.0 - delta && !est.member[i] {
                missing += 1;
            }
            if est.member[i] && r > 1.0 + delta {
                extra += 1;
            }
        }
        if missing == 0 && extra == 0 {
            passed += 1;
        }
        notes.push(format!("{missing}/{extra}"));
    }
    outcome(
        passed >= 4,
        format!("alpha {alpha:.4}; seeds passing {passed}/5 (need 4); missing/extra nodes per seed {notes:?}"),
    )
}

fn c9_convergence() -> Outcome {
    let exact = UniformBoxReference::new(4, &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
    let grid = Grid::square(2, -2.0, 2.0, 100).unwrap();
    let sizes = [500usize, 2000, 8000];
    let mut per_size = vec![Vec::new(); sizes.len()];
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let rows: Vec<[f64; 2]> = (0..8000)
            .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
            .collect();
        for (k, &n) in sizes.iter().enumerate() {
            let data = Dataset::from_rows(&rows[..n]).unwrap();
            let model = ChristoffelModel::from_data(&data, 4, true, RidgePolicy::None).unwrap();
            per_size[k].push(sup_grid_deviation(&model, &exact, &grid).unwrap());
        }
    }
    let medians: Vec<f64> = per_size.into_iter().map(median).collect();
    let shown: Vec<String> = medians.iter().map(|m| format!("{m:.3e}")).collect();
    let ok = medians.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok, format!("median sup deviations for n = {sizes:?}: {shown:?}"))
}

fn c10_outlier_aupr() -> Outcome {
    if let Ok(path) = std::env::var("CHRISTOFFEL_KDD_CSV") {
        let label: LabelColumn = std::env::var("CHRISTOFFEL_KDD_LABEL")
            .unwrap_or_else(|_| "label".into())
            .parse()
            .unwrap();
        let run = || -> christoffel::Result<f64> {
            let data = christoffel::dataset::read_csv(path.as_ref(), Some(&label))?;
            let scored = outlier_scores(&data, 2, true, RidgePolicy::Auto)?;
            Ok(pr_curve_scored(&scored)?.aupr)
        };
        return match run() {
            Ok(a) => outcome(a >= 0.15, format!("supplied dataset {path}: AUPR {a:.4} at d=2 (need >= 0.15)")),
            Err(e) => outcome(false, format!("supplied dataset {path}: {e}")),
        };
    }
    let spec = SynthSpec::default_for("gaussian_with_outliers").unwrap();
    let mut auprs = Vec::new();
    let mut prevalence = 0.0;
    for seed in 0..5 {
        let data = synth_generate(&spec, 2000, seed).unwrap();
        let scored = outlier_scores(&data, 3, true, RidgePolicy::None).unwrap();
        let curve = pr_curve_scored(&scored).unwrap();
        prevalence = curve.prevalence();
        auprs.push(curve.aupr);
    }
    let m = median(auprs);
    outcome(
        m >= 5.0 * prevalence,
        format!(
            "dataset not supplied, synthetic substitute: median AUPR {m:.4} vs 5 x prevalence {:.4}",
            5.0 * prevalence
        ),
    )
}

fn c11_affine_matching() -> Outcome {
    let spec = SynthSpec::default_for("moon_2d").unwrap();
    let mut exact = 0;
    for seed in 0..10 {
        let x = synth_generate(&spec, 500, seed).unwrap();
        let (y, _, sigma) = random_affine_shuffle(&x, 1000 + seed).unwrap();
        let m = affine_match(&x, &y, 4, RidgePolicy::None).unwrap();
        if (0..x.len()).all(|i| sigma[m.permutation[i]] == i) {
            exact += 1;
        }
    }
    outcome(exact == 10, format!("exact recoveries {exact}/10"))
}

fn c12_pr_example() -> Outcome {
    let c = pr_curve(&[4.0, 3.0, 2.0, 1.0], &[true, false, true, false]).unwrap();
    outcome(c.aupr == 5.0 / 6.0, format!("AUPR = {} (expected 5/6)", c.aupr))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "exact-model oracle equivalence", Duration::from_secs(1), c1_exact_model_oracle),
        (2, "density limit at d = 50", Duration::from_secs(1), c2_density_limit),
        (3, "bound sandwich", Duration::from_secs(2), c3_bound_sandwich),
        (4, "needle polynomial", Duration::from_secs(2), c4_needle),
        (5, "trace identity and sample floor", Duration::from_secs(5), c5_trace_and_floor),
        (6, "affine invariance", Duration::from_secs(5), c6_affine_invariance),
        (7, "QP / kernel agreement", Duration::from_secs(2), c7_qp_agreement),
        (8, "support recovery on the disk", Duration::from_secs(30), c8_support_recovery),
        (9, "empirical convergence", Duration::from_secs(60), c9_convergence),
        (10, "outlier AUPR", Duration::from_secs(30), c10_outlier_aupr),
        (11, "affine matching", Duration::from_secs(10), c11_affine_matching),
        (12, "PR worked example", Duration::from_secs(1), c12_pr_example),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.pass && took < budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {} [{:.3}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
