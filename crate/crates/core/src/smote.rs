//! SMOTE: synthetic minority oversampling along segments between a class
//! member and one of its k nearest same-class neighbors.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::Rng;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoteConfig {
    pub k: usize,
    pub target_class: usize,
    /// Class size after the run.
    pub target_count: usize,
    pub seed: u64,
}

/// Where one synthetic row came from. Indices refer to rows of the input
/// dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub sample: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SmoteRun {
    pub dataset: Dataset,
    pub origins: Vec<SyntheticOrigin>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `min(k, rows - 1)` rows nearest to row `idx` by Euclidean distance,
/// excluding `idx` itself, ordered by (distance, index).
pub fn nearest_minority_neighbors(
    points: &DenseMatrix,
    idx: usize,
    k: usize,
) -> Result<Vec<usize>> {
    if points.rows() < 2 {
        return Err(Error::arg("nearest neighbors need at least 2 points"));
    }
    if idx >= points.rows() {
        return Err(Error::arg(format!(
            "point index {idx} out of range for {} points",
            points.rows()
        )));
    }
    let anchor = points.row(idx);
    let mut candidates: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&j| j != idx)
        .map(|j| (squared_distance(anchor, points.row(j)), j))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(candidates
        .into_iter()
        .take(k.min(points.rows() - 1))
        .map(|(_, j)| j)
        .collect())
}

/// `sample + u * (neighbor - sample)` for the given gap `u`.
pub fn interpolate(sample: &[f64], neighbor: &[f64], gap: f64) -> Result<Vec<f64>> {
    if sample.len() != neighbor.len() {
        return Err(Error::arg(format!(
            "sample has {} features, neighbor has {}",
            sample.len(),
            neighbor.len()
        )));
    }
    Ok(sample
        .iter()
        .zip(neighbor)
        .map(|(s, n)| s + gap * (n - s))
        .collect())
}

/// One synthetic point with the gap drawn uniformly from `[0, 1)`.
pub fn synthesize(sample: &[f64], neighbor: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    if sample.len() != neighbor.len() {
        return Err(Error::arg(format!(
            "sample has {} features, neighbor has {}",
            sample.len(),
            neighbor.len()
        )));
    }
    interpolate(sample, neighbor, rng.next_f64())
}

/// Grows `cfg.target_class` to exactly `cfg.target_count` samples.
///
/// Synthetic rows are appended after all original rows. The i-th synthetic
/// row starts from the (i mod n)-th class member in index order; for each
/// one the generator draws a neighbor position, then a gap.
pub fn oversample_class(ds: &Dataset, cfg: &SmoteConfig) -> Result<Dataset> {
    oversample_class_traced(ds, cfg).map(|run| run.dataset)
}

pub fn oversample_class_traced(ds: &Dataset, cfg: &SmoteConfig) -> Result<SmoteRun> {
    if cfg.k == 0 {
        return Err(Error::arg("SMOTE neighbor count k must be at least 1"));
    }
    if cfg.target_class >= ds.n_classes() {
        return Err(Error::arg(format!(
            "target class {} out of range for {} classes",
            cfg.target_class,
            ds.n_classes()
        )));
    }
    let members = ds.class_indices(cfg.target_class);
    let current = members.len();
    if cfg.target_count < current {
        return Err(Error::arg(format!(
            "target count {} is below the current size {current} of class `{}`",
            cfg.target_count,
            ds.class_names()[cfg.target_class]
        )));
    }
    if cfg.target_count == current {
        return Ok(SmoteRun {
            dataset: ds.clone(),
            origins: Vec::new(),
        });
    }
    if current < 2 {
        return Err(Error::Resample(format!(
            "class `{}` has {current} sample(s); SMOTE needs at least 2",
            ds.class_names()[cfg.target_class]
        )));
    }
    if !ds.is_complete() {
        return Err(Error::Resample("dataset still has missing cells".into()));
    }

    let points = ds.features().select_rows(&members);
    let k = cfg.k.min(current - 1);
    let neighbors: Vec<Vec<usize>> = (0..current)
        .map(|i| nearest_minority_neighbors(&points, i, k))
        .collect::<Result<_>>()?;

    let mut rng = Rng::new(cfg.seed);
    let needed = cfg.target_count - current;
    let mut rows = Vec::with_capacity(needed);
    let mut origins = Vec::with_capacity(needed);
    for s in 0..needed {
        let i = s % current;
        let j = neighbors[i][rng.below(k as u64) as usize];
        let gap = rng.next_f64();
        rows.push(interpolate(points.row(i), points.row(j), gap)?);
        origins.push(SyntheticOrigin {
            sample: members[i],
            neighbor: members[j],
            gap,
        });
    }
    let mut out = ds.clone();
    out.append_rows(&rows, cfg.target_class)?;
    Ok(SmoteRun {
        dataset: out,
        origins,
    })
}

/// Runs SMOTE once per class in `order`, each run on the previous run's
/// output, bringing each listed class to `per_class_target`. Run `i` is
/// seeded with `Rng::derive(seed, i)`. Returns every intermediate dataset.
pub fn balance_sequence(
    ds: &Dataset,
    order: &[usize],
    per_class_target: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<Dataset>> {
    for (i, c) in order.iter().enumerate() {
        if order[..i].contains(c) {
            return Err(Error::arg(format!("class {c} listed twice in SMOTE order")));
        }
    }
    let mut runs: Vec<Dataset> = Vec::with_capacity(order.len());
    for (i, &class) in order.iter().enumerate() {
        let input = runs.last().unwrap_or(ds);
        let cfg = SmoteConfig {
            k,
            target_class: class,
            target_count: per_class_target,
            seed: Rng::derive(seed, i as u64),
        };
        let next = oversample_class(input, &cfg)?;
        runs.push(next);
    }
    Ok(runs)
}
