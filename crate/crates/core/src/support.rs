//! Support estimation by thresholding `s(d) Lambda` on a lattice, and
//! Hausdorff distances between finite point sets.
//!
//! Grid estimates approximate continuous sets, so every distance computed
//! from them carries an uncertainty of about one cell diagonal.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{alpha_threshold, threshold_condition, GeometryDescriptor};
use crate::christoffel::LambdaEval;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Highest dimension for which a dense lattice is allowed.
pub const MAX_GRID_DIM: usize = 3;

/// Default number of nodes per axis.
pub const DEFAULT_RESOLUTION: usize = 200;

/// One lattice axis: `n` evenly spaced nodes from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::InvalidParameter(format!("invalid grid axis {min}:{max}")));
        }
        if n == 1 && min != max {
            return Err(Error::InvalidParameter("a single-node axis needs min == max".into()));
        }
        Ok(GridAxis { min, max, n })
    }

    pub fn spacing(&self) -> f64 {
        if self.n > 1 {
            (self.max - self.min) / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }
}

/// Rectangular lattice. Node indices run with the first axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_GRID_DIM {
            return Err(Error::InvalidParameter(format!(
                "grids support 1 to {MAX_GRID_DIM} axes, got {}",
                axes.len()
            )));
        }
        Ok(Grid { axes })
    }

    /// The same axis repeated `p` times.
    pub fn square(p: usize, min: f64, max: f64, n: usize) -> Result<Self> {
        Self::new(vec![GridAxis::new(min, max, n)?; p])
    }

    /// Parses `"xmin:xmax:n[,ymin:ymax:n...]"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("invalid grid spec '{spec}', expected min:max:n per axis"));
        let axes = spec
            .split(',')
            .map(|part| {
                let fields: Vec<&str> = part.trim().split(':').collect();
                if fields.len() != 3 {
                    return Err(bad());
                }
                let min: f64 = fields[0].trim().parse().map_err(|_| bad())?;
                let max: f64 = fields[1].trim().parse().map_err(|_| bad())?;
                let n: usize = fields[2].trim().parse().map_err(|_| bad())?;
                GridAxis::new(min, max, n)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = idx % a.n;
                idx /= a.n;
                i
            })
            .collect()
    }

    fn flat_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (a, &i) in self.axes.iter().zip(multi) {
            idx += i * stride;
            stride *= a.n;
        }
        idx
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.node(i))
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Length of the diagonal of one lattice cell.
    pub fn cell_diagonal(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing().powi(2)).sum::<f64>().sqrt()
    }

    /// Face neighbors of a node that lie inside the grid.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let multi = self.multi_index(idx);
        let mut out = Vec::with_capacity(2 * self.dim());
        for (axis, a) in self.axes.iter().enumerate() {
            let mut m = multi.clone();
            if multi[axis] > 0 {
                m[axis] = multi[axis] - 1;
                out.push(self.flat_index(&m));
            }
            if multi[axis] + 1 < a.n {
                m[axis] = multi[axis] + 1;
                out.push(self.flat_index(&m));
            }
        }
        out
    }

    /// Member nodes with at least one non-member face neighbor.
    pub fn boundary_of(&self, member: &[bool]) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| member[i] && self.neighbors(i).iter().any(|&j| !member[j]))
            .collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `Lambda` at every grid node, in node order.
pub fn lambda_on_grid<E: LambdaEval>(model: &E, grid: &Grid) -> Result<Vec<f64>> {
    check_dim(model.dim(), grid.dim())?;
    (0..grid.len())
        .into_par_iter()
        .map(|i| model.lambda_at(&grid.node(i)))
        .collect()
}

/// Thresholded super-level set `{s(d) Lambda >= alpha}` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    pub grid: Grid,
    pub degree: u32,
    pub alpha: f64,
    /// Distance parameter the threshold was derived from, if any.
    pub delta: Option<f64>,
    pub basis_size: f64,
    pub lambda: Vec<f64>,
    pub member: Vec<bool>,
    /// Node indices of the boundary, increasing.
    pub boundary: Vec<usize>,
}

/// Metadata written alongside the mask dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportHeader {
    pub grid: Grid,
    pub degree: u32,
    pub alpha: f64,
    pub delta: Option<f64>,
    pub basis_size: f64,
    pub nodes: usize,
    pub members: usize,
    pub boundary_nodes: usize,
    pub cell_diagonal: f64,
}

impl SupportEstimate {
    pub fn scaled_lambda(&self) -> impl Iterator<Item = f64> + '_ {
        self.lambda.iter().map(|l| self.basis_size * l)
    }

    pub fn member_count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn member_points(&self) -> Vec<Vec<f64>> {
        (0..self.grid.len())
            .filter(|&i| self.member[i])
            .map(|i| self.grid.node(i))
            .collect()
    }

    pub fn boundary_points(&self) -> Vec<Vec<f64>> {
        self.boundary.iter().map(|&i| self.grid.node(i)).collect()
    }

    pub fn header(&self) -> SupportHeader {
        SupportHeader {
            grid: self.grid.clone(),
            degree: self.degree,
            alpha: self.alpha,
            delta: self.delta,
            basis_size: self.basis_size,
            nodes: self.grid.len(),
            members: self.member_count(),
            boundary_nodes: self.boundary.len(),
            cell_diagonal: self.grid.cell_diagonal(),
        }
    }

    /// CSV rows: node coordinates, `lambda`, `scaled_lambda`, `member`,
    /// `boundary` (flags as 0/1).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head: Vec<String> = (1..=self.grid.dim()).map(|i| format!("x{i}")).collect();
        head.extend(["lambda", "scaled_lambda", "member", "boundary"].map(String::from));
        w.write_record(&head).map_err(csv_err)?;
        let mut on_boundary = vec![false; self.grid.len()];
        for &b in &self.boundary {
            on_boundary[b] = true;
        }
        for (i, (&lambda, &member)) in self.lambda.iter().zip(&self.member).enumerate() {
            let mut rec: Vec<String> = self.grid.node(i).iter().map(|v| v.to_string()).collect();
            rec.push(lambda.to_string());
            rec.push((self.basis_size * lambda).to_string());
            rec.push(u8::from(member).to_string());
            rec.push(u8::from(on_boundary[i]).to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<output>".into(),
            source: e,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source: std::io::Error::other(e),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Marks the grid nodes with `s(d) Lambda(x) >= alpha`.
pub fn estimate_support<E: LambdaEval>(model: &E, grid: &Grid, alpha: f64) -> Result<SupportEstimate> {
    check_alpha(alpha)?;
    if grid.is_empty() {
        return Err(Error::EmptySet);
    }
    let lambda = lambda_on_grid(model, grid)?;
    let s = model.basis_size();
    let member: Vec<bool> = lambda.iter().map(|l| s * l >= alpha).collect();
    let boundary = grid.boundary_of(&member);
    Ok(SupportEstimate {
        grid: grid.clone(),
        degree: model.degree(),
        alpha,
        delta: None,
        basis_size: s,
        lambda,
        member,
        boundary,
    })
}

/// Membership of arbitrary evaluation points, for dimensions where a
/// lattice is impractical.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSupport {
    pub degree: u32,
    pub alpha: f64,
    pub basis_size: f64,
    pub lambda: Vec<f64>,
    pub member: Vec<bool>,
}

pub fn estimate_support_points<E: LambdaEval>(model: &E, points: &Dataset, alpha: f64) -> Result<PointSupport> {
    check_alpha(alpha)?;
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    check_dim(model.dim(), points.dim())?;
    let lambda: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| model.lambda_at(points.row(i)).map_err(|e| e.at_row(i)))
        .collect::<Result<_>>()?;
    let s = model.basis_size();
    let member = lambda.iter().map(|l| s * l >= alpha).collect();
    Ok(PointSupport {
        degree: model.degree(),
        alpha,
        basis_size: s,
        lambda,
        member,
    })
}

fn directed<P: AsRef<[f64]> + Sync>(a: &[P], b: &[P]) -> f64 {
    a.par_iter()
        .map(|x| {
            let x = x.as_ref();
            b.iter()
                .map(|y| {
                    x.iter()
                        .zip(y.as_ref())
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Hausdorff distance between two finite point sets, by exhaustive search.
pub fn hausdorff<P: AsRef<[f64]> + Sync>(a: &[P], b: &[P]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = a[0].as_ref().len();
    for x in a.iter().chain(b) {
        check_dim(p, x.as_ref().len())?;
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// Largest `|Lambda_a - Lambda_b|` over the grid nodes.
pub fn sup_grid_deviation<A: LambdaEval, B: LambdaEval>(a: &A, b: &B, grid: &Grid) -> Result<f64> {
    let la = lambda_on_grid(a, grid)?;
    let lb = lambda_on_grid(b, grid)?;
    Ok(la.iter().zip(&lb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Boundary nodes of `{Lambda >= c}` on a grid.
pub fn level_set_boundary<E: LambdaEval>(model: &E, grid: &Grid, c: f64) -> Result<Vec<usize>> {
    let lambda = lambda_on_grid(model, grid)?;
    let member: Vec<bool> = lambda.iter().map(|&l| l >= c).collect();
    Ok(grid.boundary_of(&member))
}

/// Hausdorff distance between the boundary of `{Lambda_n >= c}` for each
/// model and the boundary of `{Lambda >= c}` for the exact one.
///
/// A model whose level set has no boundary node on the grid gets an
/// infinite distance.
pub fn boundary_consistency_check<M: LambdaEval, E: LambdaEval>(
    models: &[M],
    exact: &E,
    grid: &Grid,
    c: f64,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::EmptySet);
    }
    let exact_lambda = lambda_on_grid(exact, grid)?;
    let sup = exact_lambda.iter().copied().fold(0.0, f64::max);
    if !(c > 0.0 && c < sup) {
        return Err(Error::LevelOutOfRange { level: c, sup });
    }
    let member: Vec<bool> = exact_lambda.iter().map(|&l| l >= c).collect();
    let exact_boundary: Vec<Vec<f64>> = grid.boundary_of(&member).iter().map(|&i| grid.node(i)).collect();
    if exact_boundary.is_empty() {
        return Err(Error::InvalidParameter(
            "the exact level set has no boundary node on this grid".into(),
        ));
    }
    models
        .iter()
        .map(|m| {
            let nodes: Vec<Vec<f64>> = level_set_boundary(m, grid, c)?
                .iter()
                .map(|&i| grid.node(i))
                .collect();
            if nodes.is_empty() {
                Ok(f64::INFINITY)
            } else {
                hausdorff(&nodes, &exact_boundary)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub delta: f64,
    pub degree: u32,
    pub alpha: f64,
}

/// Degrees and thresholds for a decreasing sequence of distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    pub entries: Vec<ScheduleEntry>,
    pub geometry: GeometryDescriptor,
    pub weighted: bool,
}

/// Pairs each `delta_k` with the smallest admissible degree not below the
/// previous one, and its threshold.
pub fn build_schedule(
    deltas: &[f64],
    geom: &GeometryDescriptor,
    weighted: bool,
    d_cap: u32,
) -> Result<ThresholdSchedule> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("at least one delta is required".into()));
    }
    for (k, &delta) in deltas.iter().enumerate() {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if k > 0 && delta >= deltas[k - 1] {
            return Err(Error::InvalidParameter("deltas must be strictly decreasing".into()));
        }
    }
    let mut entries = Vec::with_capacity(deltas.len());
    let mut start = 1;
    for &delta in deltas {
        let mut degree = None;
        for d in start..=d_cap {
            if threshold_condition(d, delta, geom, weighted)? {
                degree = Some(d);
                break;
            }
        }
        let degree = degree.ok_or(Error::DegreeCapExceeded { cap: d_cap })?;
        entries.push(ScheduleEntry {
            delta,
            degree,
            alpha: alpha_threshold(degree, delta, geom, weighted)?,
        });
        start = degree;
    }
    Ok(ThresholdSchedule {
        entries,
        geometry: geom.clone(),
        weighted,
    })
}
