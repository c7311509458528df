use std::path::Path;

use christoffel::applications::{
    affine_match, density_estimate, kde_scores, outlier_scores, pr_curve, random_affine_shuffle, read_scores,
    synth_generate, write_scores, SynthSpec, AUPR_RULE,
};
use christoffel::bounds::{alpha_threshold, GeometryDescriptor, DEFAULT_D_CAP};
use christoffel::dataset::{read_csv, write_csv};
use christoffel::support::{build_schedule, estimate_support, estimate_support_points, Grid, GridAxis, DEFAULT_RESOLUTION};
use christoffel::{ChristoffelModel, Dataset, LabelColumn, RidgePolicy};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_rows, Sink};

/// Largest dimension accepted for `--grid`.
const MAX_CLI_GRID_DIM: usize = 2;

fn label_column(cfg: &RunConfig) -> Option<LabelColumn> {
    cfg.label_column.as_deref().map(|s| s.parse().expect("infallible"))
}

fn load(cfg: &RunConfig, k: usize) -> CliResult<Dataset> {
    let path = cfg
        .input
        .get(k)
        .ok_or_else(|| CliError::usage(format!("{} requires --input", cfg.command)))?;
    Ok(read_csv(path, label_column(cfg).as_ref())?)
}

fn ridge(cfg: &RunConfig) -> CliResult<RidgePolicy> {
    Ok(cfg.ridge.as_deref().unwrap_or("auto").parse()?)
}

fn fit_data(cfg: &RunConfig, data: &Dataset) -> CliResult<ChristoffelModel> {
    Ok(ChristoffelModel::from_data(data, cfg.require_degree()?, cfg.standardize(), ridge(cfg)?)?)
}

fn load_model(path: &Path) -> CliResult<ChristoffelModel> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(christoffel::Error::from)?;
    if let Some(inner) = value.get_mut("model") {
        value = inner.take();
    }
    let doc = serde_json::from_value(value).map_err(christoffel::Error::from)?;
    Ok(ChristoffelModel::from_document(&doc)?)
}

/// Model from `--model`, or fitted on the first input.
fn model_or_fit(cfg: &RunConfig) -> CliResult<(ChristoffelModel, Option<Dataset>)> {
    match &cfg.model {
        Some(path) => Ok((load_model(path)?, None)),
        None => {
            let data = load(cfg, 0)?;
            Ok((fit_data(cfg, &data)?, Some(data)))
        }
    }
}

fn parse_box(spec: &str) -> CliResult<Vec<(f64, f64)>> {
    spec.split(',')
        .map(|part| {
            let f: Vec<&str> = part.trim().split(':').collect();
            let parsed = match f.as_slice() {
                [lo, hi] => lo.trim().parse::<f64>().ok().zip(hi.trim().parse::<f64>().ok()),
                _ => None,
            };
            parsed.ok_or_else(|| CliError::usage(format!("invalid box '{spec}', expected lo:hi per axis")))
        })
        .collect()
}

fn parse_grid(cfg: &RunConfig, spec: &str, dim: usize) -> CliResult<Grid> {
    if dim > MAX_CLI_GRID_DIM {
        return Err(CliError::usage(format!(
            "dimension {dim}: evaluation points required (--points); grids are limited to {MAX_CLI_GRID_DIM} dimensions"
        )));
    }
    let grid = Grid::parse(spec)?;
    if grid.dim() != dim {
        return Err(CliError::usage(format!(
            "{}: grid has {} axes but the data has dimension {dim}",
            cfg.command,
            grid.dim()
        )));
    }
    Ok(grid)
}

/// Default lattice over a box, padded by `pad` on each side.
fn default_grid(bounds: &[(f64, f64)], pad: f64) -> CliResult<Grid> {
    if bounds.len() > MAX_CLI_GRID_DIM {
        return Err(CliError::usage(format!(
            "dimension {}: evaluation points required (--points)",
            bounds.len()
        )));
    }
    let axes = bounds
        .iter()
        .map(|&(lo, hi)| GridAxis::new(lo - pad, hi + pad, DEFAULT_RESOLUTION))
        .collect::<christoffel::Result<Vec<_>>>()?;
    Ok(Grid::new(axes)?)
}

/// Evaluation points from `--points`, `--grid`, or a default lattice.
enum Queries {
    Points(Dataset),
    Lattice(Grid),
}

impl Queries {
    fn resolve(cfg: &RunConfig, dim: usize, fallback_box: Option<&[(f64, f64)]>, pad: f64) -> CliResult<Self> {
        if let Some(path) = &cfg.points {
            if cfg.grid.is_some() {
                return Err(CliError::usage("give either --points or --grid, not both"));
            }
            let pts = read_csv(path, None)?;
            if pts.dim() != dim {
                return Err(christoffel::Error::DimensionMismatch {
                    expected: dim,
                    got: pts.dim(),
                }
                .into());
            }
            return Ok(Queries::Points(pts));
        }
        if let Some(spec) = &cfg.grid {
            return Ok(Queries::Lattice(parse_grid(cfg, spec, dim)?));
        }
        match fallback_box {
            Some(b) => Ok(Queries::Lattice(default_grid(b, pad)?)),
            None => Err(CliError::usage(format!("{} requires --points or --grid", cfg.command))),
        }
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            Queries::Points(d) => d.rows().map(<[f64]>::to_vec).collect(),
            Queries::Lattice(g) => g.nodes(),
        }
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Queries::Points(d) => json!({ "points": d.len() }),
            Queries::Lattice(g) => json!({ "grid": g }),
        }
    }
}

fn coord_header(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("x{i}")).collect()
}

fn num(v: f64) -> String {
    v.to_string()
}

#[derive(Serialize)]
struct FitSummary {
    n: Option<usize>,
    p: usize,
    d: u32,
    basis_size: usize,
    ridge: f64,
    condition_estimate: f64,
}

fn summary(model: &ChristoffelModel, n: Option<usize>) -> FitSummary {
    FitSummary {
        n,
        p: model.dim(),
        d: model.degree(),
        basis_size: model.basis_size(),
        ridge: model.ridge(),
        condition_estimate: model.condition_estimate(),
    }
}

pub fn fit(cfg: &RunConfig) -> CliResult<()> {
    let data = load(cfg, 0)?;
    let model = fit_data(cfg, &data)?;
    let s = summary(&model, Some(data.len()));
    let doc = json!({ "config": cfg, "summary": &s, "model": model.to_document() });
    let sink = Sink::new(cfg.output.clone());
    sink.json(&doc)?;
    if cfg.output.is_some() {
        println!("{}", serde_json::to_string(&s).map_err(christoffel::Error::from)?);
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> CliResult<()> {
    let (model, data) = model_or_fit(cfg)?;
    let bbox = data.as_ref().map(Dataset::bounding_box);
    let queries = Queries::resolve(cfg, model.dim(), bbox.as_deref(), 0.0)?;
    let rows = queries.rows();
    let lambda = model.lambda_batch(&rows, true)?;
    let s = model.basis_size() as f64;
    let header = json!({
        "config": cfg,
        "summary": summary(&model, data.as_ref().map(Dataset::len)),
        "queries": queries.describe(),
    });
    let mut cols = coord_header(model.dim());
    cols.extend(["lambda", "scaled_lambda", "kappa"].map(String::from));
    Sink::new(cfg.output.clone()).table(&header, |w| {
        write_rows(
            w,
            &cols,
            rows.iter().zip(&lambda).map(|(x, &l)| {
                let mut r: Vec<String> = x.iter().copied().map(num).collect();
                r.extend([num(l), num(s * l), num(1.0 / l)]);
                r
            }),
        )
    })
}

pub fn score(cfg: &RunConfig) -> CliResult<()> {
    let data = load(cfg, 0)?;
    let method = cfg.method.as_deref().unwrap_or("christoffel");
    let scored = match method {
        "christoffel" => outlier_scores(&data, cfg.require_degree()?, cfg.standardize(), ridge(cfg)?)?,
        "kde" => kde_scores(
            &data,
            cfg.sigma
                .ok_or_else(|| CliError::usage("kde scoring requires --sigma"))?,
        )?,
        other => return Err(CliError::usage(format!("unknown method '{other}', expected christoffel or kde"))),
    };
    let aupr = match scored.labels() {
        Some(labels) => match pr_curve(&scored.scores, labels) {
            Ok(c) => json!({ "aupr": c.aupr, "prevalence": c.prevalence(), "rule": c.rule }),
            Err(e) => json!({ "error": e.to_string() }),
        },
        None => serde_json::Value::Null,
    };
    let header = json!({
        "config": cfg,
        "method": &scored.method,
        "n": scored.scores.len(),
        "evaluation": aupr,
    });
    Sink::new(cfg.output.clone()).table(&header, |w| write_scores(&scored, w))
}

pub fn density(cfg: &RunConfig) -> CliResult<()> {
    let data = load(cfg, 0)?;
    let d = cfg.require_degree()?;
    let bounds = match &cfg.bounds {
        Some(spec) => parse_box(spec)?,
        None => data.bounding_box(),
    };
    let queries = Queries::resolve(cfg, data.dim(), Some(&bounds), 0.0)?;
    let rows = queries.rows();
    let est = density_estimate(&data, d, &bounds, &rows, ridge(cfg)?)?;
    if est.dropped > 0 {
        eprintln!("warning: {} data points outside the box were dropped", est.dropped);
    }
    if !est.outside_queries.is_empty() {
        eprintln!(
            "warning: {} query points lie outside the box; ratios there extrapolate",
            est.outside_queries.len()
        );
    }
    let volume: f64 = bounds.iter().map(|(lo, hi)| hi - lo).product();
    let header = json!({
        "config": cfg,
        "degree": d,
        "box": &bounds,
        "box_volume": volume,
        "dropped": est.dropped,
        "outside_queries": est.outside_queries.len(),
        "queries": queries.describe(),
    });
    let mut cols = coord_header(data.dim());
    cols.extend(["ratio", "density"].map(String::from));
    Sink::new(cfg.output.clone()).table(&header, |w| {
        write_rows(
            w,
            &cols,
            rows.iter().zip(&est.ratios).map(|(x, &r)| {
                let mut row: Vec<String> = x.iter().copied().map(num).collect();
                row.extend([num(r), num(r / volume)]);
                row
            }),
        )
    })
}

/// Geometry from explicit flags, completed from the data's bounding box.
fn geometry(cfg: &RunConfig, data: Option<&Dataset>, dim: usize) -> CliResult<(GeometryDescriptor, &'static str)> {
    let (geom, source) = match (cfg.diam, cfg.volume) {
        (Some(diam), Some(volume)) => (GeometryDescriptor::new(dim, diam, volume)?, "given"),
        (diam, volume) => {
            let data = data.ok_or_else(|| {
                CliError::usage(format!("{} requires --diam and --volume (or --input to estimate them)", cfg.command))
            })?;
            let from_box = GeometryDescriptor::from_box(&data.bounding_box())?;
            let g = GeometryDescriptor::new(
                dim,
                diam.unwrap_or(from_box.diameter),
                volume.unwrap_or(from_box.volume),
            )?;
            (g, "heuristic_bounding_box")
        }
    };
    let geom = match cfg.wmin {
        Some(w) => geom.with_density_floor(w)?,
        None => geom,
    };
    Ok((geom, source))
}

pub fn support(cfg: &RunConfig) -> CliResult<()> {
    let (model, data) = model_or_fit(cfg)?;
    let p = model.dim();
    let weighted = cfg.wmin.is_some();
    let (alpha, alpha_source, geom) = match cfg.alpha {
        Some(a) => (a, "override", None),
        None => {
            let delta = cfg
                .delta
                .ok_or_else(|| CliError::usage("support requires --delta or --alpha"))?;
            let (geom, source) = geometry(cfg, data.as_ref(), p)?;
            let a = alpha_threshold(model.degree(), delta, &geom, weighted)?;
            (a, "threshold", Some((geom, source)))
        }
    };
    let pad = cfg.delta.unwrap_or(0.0);
    let bbox = data.as_ref().map(Dataset::bounding_box);
    let queries = Queries::resolve(cfg, p, bbox.as_deref(), pad)?;
    let sink = Sink::new(cfg.output.clone());
    let mut header = json!({
        "config": cfg,
        "degree": model.degree(),
        "alpha": alpha,
        "alpha_source": alpha_source,
        "delta": cfg.delta,
        "weighted": weighted,
    });
    if let Some((g, source)) = &geom {
        header["geometry"] = json!(g);
        header["geometry_source"] = json!(source);
    }
    match queries {
        Queries::Lattice(grid) => {
            let mut est = estimate_support(&model, &grid, alpha)?;
            est.delta = cfg.delta;
            header["support"] = json!(est.header());
            sink.table(&header, |w| est.write_csv(w))
        }
        Queries::Points(points) => {
            let est = estimate_support_points(&model, &points, alpha)?;
            header["points"] = json!(points.len());
            header["members"] = json!(est.member.iter().filter(|&&m| m).count());
            let mut cols = coord_header(p);
            cols.extend(["lambda", "scaled_lambda", "member"].map(String::from));
            sink.table(&header, |w| {
                write_rows(
                    w,
                    &cols,
                    points.rows().enumerate().map(|(i, x)| {
                        let mut r: Vec<String> = x.iter().copied().map(num).collect();
                        r.extend([
                            num(est.lambda[i]),
                            num(est.basis_size * est.lambda[i]),
                            u8::from(est.member[i]).to_string(),
                        ]);
                        r
                    }),
                )
            })
        }
    }
}

pub fn matching(cfg: &RunConfig) -> CliResult<()> {
    if cfg.input.len() != 2 {
        return Err(CliError::usage("match requires exactly two --input files"));
    }
    let a = load(cfg, 0)?;
    let b = load(cfg, 1)?;
    let d = cfg.require_degree()?;
    let m = affine_match(&a, &b, d, ridge(cfg)?)?;
    if m.tie_flag {
        eprintln!("warning: near-tied Christoffel values; the matching between tied points is arbitrary");
    }
    let header = json!({
        "config": cfg,
        "degree": d,
        "n": a.len(),
        "tie_flag": m.tie_flag,
    });
    let cols = ["source_index", "target_index", "lambda_source", "lambda_target"].map(String::from);
    Sink::new(cfg.output.clone()).table(&header, |w| {
        write_rows(
            w,
            &cols,
            m.permutation.iter().enumerate().map(|(i, &j)| {
                vec![i.to_string(), j.to_string(), num(m.lambda_a[i]), num(m.lambda_a_prime[j])]
            }),
        )
    })
}

pub fn schedule(cfg: &RunConfig) -> CliResult<()> {
    let deltas = match (&cfg.deltas, cfg.delta) {
        (Some(ds), _) => ds.clone(),
        (None, Some(d)) => vec![d],
        (None, None) => return Err(CliError::usage("schedule requires --deltas")),
    };
    let data = if cfg.input.is_empty() { None } else { Some(load(cfg, 0)?) };
    let dim = match (cfg.dim, &data) {
        (Some(p), _) => p,
        (None, Some(d)) => d.dim(),
        (None, None) => return Err(CliError::usage("schedule requires --dim (or --input)")),
    };
    let (geom, source) = geometry(cfg, data.as_ref(), dim)?;
    let s = build_schedule(&deltas, &geom, cfg.wmin.is_some(), cfg.d_cap.unwrap_or(DEFAULT_D_CAP))?;
    Sink::new(cfg.output.clone()).json(&json!({
        "config": cfg,
        "geometry_source": source,
        "schedule": s,
    }))
}

pub fn aupr(cfg: &RunConfig) -> CliResult<()> {
    if cfg.scores.is_empty() {
        return Err(CliError::usage("aupr requires at least one --scores file"));
    }
    let external_labels = if cfg.input.is_empty() {
        None
    } else {
        let data = load(cfg, 0)?;
        Some(data.labels().ok_or(christoffel::Error::MissingLabels)?.to_vec())
    };
    let mut results = Vec::new();
    for path in &cfg.scores {
        let file = std::fs::File::open(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let (scores, labels) = read_scores(file, &path.display().to_string())?;
        let labels = external_labels
            .clone()
            .or(labels)
            .ok_or(christoffel::Error::MissingLabels)?;
        let curve = pr_curve(&scores, &labels)?;
        results.push(json!({
            "scores": path,
            "aupr": curve.aupr,
            "prevalence": curve.prevalence(),
            "positives": curve.positives,
            "negatives": curve.negatives,
            "points": curve.points,
        }));
    }
    Sink::new(cfg.output.clone()).json(&json!({
        "config": cfg,
        "rule": AUPR_RULE,
        "results": results,
    }))
}

pub fn generate(cfg: &RunConfig) -> CliResult<()> {
    let spec = match (&cfg.generator, &cfg.kind) {
        (Some(spec), _) => spec.clone(),
        (None, Some(kind)) => SynthSpec::default_for(kind)?,
        (None, None) => return Err(CliError::usage("generate requires --kind")),
    };
    let n = cfg.n.ok_or_else(|| CliError::usage("generate requires --n"))?;
    let data = synth_generate(&spec, n, cfg.seed())?;
    let sink = Sink::new(cfg.output.clone());
    let mut meta = json!({ "config": cfg, "generator": &spec, "n": n, "seed": cfg.seed() });
    if cfg.affine_shuffle {
        let (shuffled, map, sigma) = random_affine_shuffle(&data, cfg.seed().wrapping_add(1))?;
        let path = sink.extra_csv(".shuffled.csv", |w| write_csv(&shuffled, w))?;
        meta["shuffled"] = json!({ "path": path, "map": map, "sigma": sigma });
    }
    sink.table(&meta, |w| write_csv(&data, w))
}

pub fn dispatch(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command.as_str() {
        "fit" => fit(cfg),
        "eval" => eval(cfg),
        "score" => score(cfg),
        "density" => density(cfg),
        "support" => support(cfg),
        "match" => matching(cfg),
        "schedule" => schedule(cfg),
        "aupr" => aupr(cfg),
        "generate" => generate(cfg),
        other => Err(CliError::usage(format!("unknown command '{other}'"))),
    }
}
