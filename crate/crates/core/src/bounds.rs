//! Quantitative bounds on the scaled Christoffel function of a uniform
//! measure, and the degree/threshold rule built from them.
//!
//! Inside a compact set `S` at distance at least `delta` from the boundary,
//!
//! ```text
//! s(d) Lambda(x) >= delta^p omega_p / vol(S) * (d+1)(d+2)(d+3) / ((d+p+1)(d+p+2)(2d+p+6))
//! ```
//!
//! and at distance at least `delta` outside `S`,
//!
//! ```text
//! s(d) Lambda(x) <= 2^(3 - delta d / (delta + diam S)) d^p (e/p)^p exp(p^2/d).
//! ```
//!
//! The threshold degree for a given `delta` is the smallest `d` for which the
//! outside bound falls below the inside bound. Outside bounds are computed in
//! log-space since `d^p` and `2^(...)` leave the `f64` range for large `d`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap for the degree scan in [`compute_dk`].
pub const DEFAULT_D_CAP: u32 = 10_000;

/// Log-space slack within which the threshold comparison counts as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// What is known (or upper-bounded) about the support `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDescriptor {
    pub dim: usize,
    /// `diam(S)` or an upper bound.
    pub diameter: f64,
    /// Lebesgue volume `vol(S)` or an upper bound.
    pub volume: f64,
    /// Lower bound on the density for the weighted variant.
    pub w_minus: Option<f64>,
}

impl GeometryDescriptor {
    pub fn new(dim: usize, diameter: f64, volume: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::InvalidParameter(format!("diameter must be positive, got {diameter}")));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::InvalidParameter(format!("volume must be positive, got {volume}")));
        }
        Ok(GeometryDescriptor {
            dim,
            diameter,
            volume,
            w_minus: None,
        })
    }

    pub fn with_density_floor(mut self, w_minus: f64) -> Result<Self> {
        if !(w_minus > 0.0 && w_minus.is_finite()) {
            return Err(Error::InvalidParameter(format!("density floor must be positive, got {w_minus}")));
        }
        self.w_minus = Some(w_minus);
        Ok(self)
    }

    /// Geometry of an axis-aligned box: its diagonal and volume.
    pub fn from_box(bounds: &[(f64, f64)]) -> Result<Self> {
        let diameter = bounds.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt();
        let volume = bounds.iter().map(|(lo, hi)| hi - lo).product();
        Self::new(bounds.len(), diameter, volume)
    }

    /// Surface area of the unit sphere in `R^{p+1}`.
    pub fn omega(&self) -> f64 {
        omega(self.dim)
    }
}

/// `Gamma(k / 2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    let (mut g, mut x) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `omega_p = 2 pi^{(p+1)/2} / Gamma((p+1)/2)`.
pub fn omega(p: usize) -> f64 {
    2.0 * PI.powf((p as f64 + 1.0) / 2.0) / gamma_half(p + 1)
}

/// Chebyshev polynomial of the first kind.
pub fn chebyshev(d: u32, t: f64) -> f64 {
    if t.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, t);
        if d == 0 {
            return 1.0;
        }
        for _ in 1..d {
            let next = 2.0 * t * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else if t > 1.0 {
        let r = t + (t * t - 1.0).sqrt();
        let rd = r.powi(d as i32);
        0.5 * (rd + 1.0 / rd)
    } else {
        let v = chebyshev(d, -t);
        if d.is_multiple_of(2) {
            v
        } else {
            -v
        }
    }
}

/// Needle polynomial of degree `2d` centered at `x`:
/// `q(y) = T_d(1 + delta^2 - |y - x|^2) / T_d(1 + delta^2)`.
///
/// `q(x) = 1`, `|q| <= 1` where `|y - x| <= 1`, and `|q| <= 2^{1 - delta d}`
/// where additionally `|y - x| >= delta`. With `x` at the origin the first
/// region is the whole unit ball.
pub fn needle_polynomial(d: u32, delta: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("needle degree must be at least 1".into()));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.iter().map(|v| v * v).sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter("needle center must lie in the unit ball".into()));
    }
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let top = 1.0 + delta * delta;
    Ok(chebyshev(d, top - r2) / chebyshev(d, top))
}

/// Inside lower bound on `s(d) Lambda` at points `delta` away from the
/// boundary. Valid for `d >= 2`, `delta > 0`. With `weighted`, the density
/// floor replaces `1 / vol(S)`.
pub fn lower_bound_inside(d: u32, delta: f64, geom: &GeometryDescriptor) -> f64 {
    inside_formula(d, delta, geom, 1.0 / geom.volume)
}

fn inside_formula(d: u32, delta: f64, geom: &GeometryDescriptor, density: f64) -> f64 {
    let p = geom.dim as f64;
    let d = d as f64;
    let ratio = (d + 1.0) * (d + 2.0) * (d + 3.0) / ((d + p + 1.0) * (d + p + 2.0) * (2.0 * d + p + 6.0));
    delta.powi(geom.dim as i32) * geom.omega() * density * ratio
}

/// `ln` of [`binomial_bound`].
pub fn ln_binomial_bound(p: usize, d: u32) -> f64 {
    let (p, d) = (p as f64, d as f64);
    p * d.ln() + p * (1.0 - p.ln()) + p * p / d
}

/// Upper bound `d^p (e/p)^p exp(p^2/d)` on `C(p + d, d)`, for `d >= 1`.
pub fn binomial_bound(p: usize, d: u32) -> f64 {
    ln_binomial_bound(p, d).exp()
}

/// `ln` of [`upper_bound_outside`].
pub fn ln_upper_bound_outside(d: u32, delta: f64, geom: &GeometryDescriptor) -> f64 {
    let decay = 3.0 - delta * d as f64 / (delta + geom.diameter);
    decay * LN_2 + ln_binomial_bound(geom.dim, d)
}

/// Outside upper bound on `s(d) Lambda` at points at distance at least
/// `delta` from `S`. Valid for `d >= 1`, `delta > 0`.
pub fn upper_bound_outside(d: u32, delta: f64, geom: &GeometryDescriptor) -> f64 {
    ln_upper_bound_outside(d, delta, geom).exp()
}

/// `n! / (sqrt(2 pi n) n^n e^{-n})`.
pub fn robbins_ratio(n: u32) -> f64 {
    let n_f = n as f64;
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (ln_fact - 0.5 * (2.0 * PI * n_f).ln() - n_f * n_f.ln() + n_f).exp()
}

/// `(exp(1/(12n+1)), exp(1/(12n)))`, the bracket around [`robbins_ratio`].
pub fn robbins_bounds(n: u32) -> (f64, f64) {
    let n = n as f64;
    ((1.0 / (12.0 * n + 1.0)).exp(), (1.0 / (12.0 * n)).exp())
}

/// Threshold `alpha` paired with degree `d` and distance `delta`.
pub fn alpha_threshold(d: u32, delta: f64, geom: &GeometryDescriptor, weighted: bool) -> Result<f64> {
    let density = if weighted {
        geom.w_minus
            .ok_or_else(|| Error::InvalidParameter("weighted threshold needs a density floor".into()))?
    } else {
        1.0 / geom.volume
    };
    Ok(inside_formula(d, delta, geom, density))
}

/// Smallest degree `d` at which the outside bound drops to the threshold:
/// `upper_bound_outside(d) <= alpha_threshold(d)`. Compared in logs; a
/// difference within [`TIE_TOLERANCE`] counts as satisfied.
pub fn compute_dk(delta: f64, geom: &GeometryDescriptor, weighted: bool, d_cap: u32) -> Result<u32> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    for d in 1..=d_cap {
        if threshold_condition(d, delta, geom, weighted)? {
            return Ok(d);
        }
    }
    Err(Error::DegreeCapExceeded { cap: d_cap })
}

/// Whether `(d, alpha_threshold(d))` satisfies the degree condition for
/// `delta`.
pub fn threshold_condition(d: u32, delta: f64, geom: &GeometryDescriptor, weighted: bool) -> Result<bool> {
    let alpha = alpha_threshold(d, delta, geom, weighted)?;
    Ok(ln_upper_bound_outside(d, delta, geom) <= alpha.ln() + TIE_TOLERANCE)
}
