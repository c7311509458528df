//! Seeded synthetic point clouds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Generator kind and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthSpec {
    /// `N(mean, sd^2)` restricted to `[lo, hi]` by rejection.
    TruncatedGaussian1d { mean: f64, sd: f64, lo: f64, hi: f64 },
    /// Uniform on the disk of the given radius centred at the origin.
    UniformDisk { radius: f64 },
    /// Uniform on the star `r <= a + b cos(k theta)`.
    StarDomain { a: f64, b: f64, k: u32 },
    /// Standard Gaussian cloud in `R^dim` plus a fraction of points uniform
    /// on `[-half_width, half_width]^dim`, labelled `true`.
    GaussianWithOutliers {
        dim: usize,
        outlier_fraction: f64,
        half_width: f64,
    },
    /// Two interleaved half circles with Gaussian noise.
    Moon2d { noise: f64 },
}

impl SynthSpec {
    pub const KINDS: [&'static str; 5] = [
        "truncated_gaussian_1d",
        "uniform_disk",
        "star_domain",
        "gaussian_with_outliers",
        "moon_2d",
    ];

    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "truncated_gaussian_1d" => SynthSpec::TruncatedGaussian1d {
                mean: 0.0,
                sd: 1.0,
                lo: -1.0,
                hi: 1.0,
            },
            "uniform_disk" => SynthSpec::UniformDisk { radius: 1.0 },
            "star_domain" => SynthSpec::StarDomain { a: 1.0, b: 0.4, k: 5 },
            "gaussian_with_outliers" => SynthSpec::GaussianWithOutliers {
                dim: 3,
                outlier_fraction: 0.02,
                half_width: 5.0,
            },
            "moon_2d" => SynthSpec::Moon2d { noise: 0.1 },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown generator '{other}', expected one of {}",
                    Self::KINDS.join(", ")
                )))
            }
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        match *self {
            SynthSpec::TruncatedGaussian1d { mean, sd, lo, hi } => {
                if !(sd > 0.0 && sd.is_finite() && mean.is_finite() && lo < hi && lo.is_finite() && hi.is_finite()) {
                    return bad("truncated gaussian needs sd > 0 and lo < hi");
                }
                // keep the acceptance rate reasonable
                if (lo - mean) / sd > 6.0 || (mean - hi) / sd > 6.0 {
                    return bad("truncation window is too far in the tail");
                }
            }
            SynthSpec::UniformDisk { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad("disk radius must be positive");
                }
            }
            SynthSpec::StarDomain { a, b, k } => {
                if !(a > 0.0 && a.is_finite() && b.is_finite() && b.abs() < a && k >= 1) {
                    return bad("star needs a > |b| and k >= 1");
                }
            }
            SynthSpec::GaussianWithOutliers {
                dim,
                outlier_fraction,
                half_width,
            } => {
                if dim == 0 || !(0.0..1.0).contains(&outlier_fraction) || !(half_width > 0.0 && half_width.is_finite()) {
                    return bad("outlier mixture needs dim >= 1, fraction in [0, 1) and a positive box");
                }
            }
            SynthSpec::Moon2d { noise } => {
                if !(noise >= 0.0 && noise.is_finite()) {
                    return bad("moon noise must be nonnegative");
                }
            }
        }
        Ok(())
    }
}

/// Draws `n` points from `spec`; the same seed always gives the same cloud.
pub fn synth_generate(spec: &SynthSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        SynthSpec::TruncatedGaussian1d { mean, sd, lo, hi } => {
            let normal = Normal::new(mean, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut values = Vec::with_capacity(n);
            while values.len() < n {
                let x = normal.sample(&mut rng);
                if (lo..=hi).contains(&x) {
                    values.push(x);
                }
            }
            Dataset::from_flat(1, values)
        }
        SynthSpec::UniformDisk { radius } => {
            let values = rejection(&mut rng, n, radius, |x, y| x * x + y * y <= radius * radius);
            Dataset::from_flat(2, values)
        }
        SynthSpec::StarDomain { a, b, k } => {
            let outer = a + b.abs();
            let values = rejection(&mut rng, n, outer, |x, y| {
                let r = (x * x + y * y).sqrt();
                r <= a + b * (k as f64 * y.atan2(x)).cos()
            });
            Dataset::from_flat(2, values)
        }
        SynthSpec::GaussianWithOutliers {
            dim,
            outlier_fraction,
            half_width,
        } => {
            let outliers = (outlier_fraction * n as f64).round() as usize;
            let mut values = Vec::with_capacity(n * dim);
            for _ in 0..n - outliers {
                values.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
            }
            for _ in 0..outliers {
                values.extend((0..dim).map(|_| rng.random_range(-half_width..=half_width)));
            }
            let labels = (0..n).map(|i| i >= n - outliers).collect();
            Dataset::from_flat(dim, values)?.with_labels(labels)
        }
        SynthSpec::Moon2d { noise } => {
            let upper = n.div_ceil(2);
            let mut values = Vec::with_capacity(2 * n);
            for i in 0..n {
                let t = PI * rng.random::<f64>();
                let (x, y) = if i < upper {
                    (t.cos(), t.sin())
                } else {
                    (1.0 - t.cos(), 0.5 - t.sin())
                };
                let (ex, ey) = if noise > 0.0 {
                    (
                        noise * rng.sample::<f64, _>(StandardNormal),
                        noise * rng.sample::<f64, _>(StandardNormal),
                    )
                } else {
                    (0.0, 0.0)
                };
                values.push(x + ex);
                values.push(y + ey);
            }
            Dataset::from_flat(2, values)
        }
    }
}

fn rejection<F: Fn(f64, f64) -> bool>(rng: &mut ChaCha8Rng, n: usize, half: f64, accept: F) -> Vec<f64> {
    let mut values = Vec::with_capacity(2 * n);
    while values.len() < 2 * n {
        let x = rng.random_range(-half..=half);
        let y = rng.random_range(-half..=half);
        if accept(x, y) {
            values.push(x);
            values.push(y);
        }
    }
    values
}
