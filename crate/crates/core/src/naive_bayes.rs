//! Gaussian naive Bayes: class priors times a product of independent
//! per-feature normal densities, evaluated in log space.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::textblock::{ModelReader, ModelWriter};

/// Lower bound on every per-class feature standard deviation.
pub const STD_FLOOR: f64 = 1e-6;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    pub priors: Vec<f64>,
    /// n_classes x n_features
    pub means: DenseMatrix,
    /// n_classes x n_features, each at least `std_floor`
    pub stds: DenseMatrix,
    /// Training samples per class. A class with none scores `-inf`.
    pub class_counts: Vec<usize>,
    pub class_names: Vec<String>,
    pub std_floor: f64,
}

pub fn fit_nb(ds: &Dataset) -> Result<NbModel> {
    fit_nb_with_floor(ds, STD_FLOOR)
}

/// Laplace-smoothed priors `(n_c + 1) / (N + C)`; per-class sample means
/// and standard deviations (divisor `n_c - 1`), floored at `std_floor`.
pub fn fit_nb_with_floor(ds: &Dataset, std_floor: f64) -> Result<NbModel> {
    if ds.n_samples() == 0 {
        return Err(Error::arg("cannot fit naive Bayes on an empty dataset"));
    }
    if ds.n_features() == 0 {
        return Err(Error::arg("naive Bayes needs at least one feature"));
    }
    if !(std_floor > 0.0 && std_floor.is_finite()) {
        return Err(Error::arg(format!(
            "std floor must be positive, got {std_floor}"
        )));
    }
    let n_classes = ds.n_classes();
    let p = ds.n_features();
    let counts = ds.class_counts();
    let total = ds.n_samples() as f64;

    let mut means = DenseMatrix::zeros(n_classes, p);
    for (row, &label) in ds.features().row_iter().zip(ds.labels()) {
        for (m, v) in means.row_mut(label).iter_mut().zip(row) {
            *m += v;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            means.row_mut(c).iter_mut().for_each(|m| *m /= n as f64);
        }
    }
    let mut stds = DenseMatrix::zeros(n_classes, p);
    for (row, &label) in ds.features().row_iter().zip(ds.labels()) {
        let mu = means.row(label).to_vec();
        for ((s, v), m) in stds.row_mut(label).iter_mut().zip(row).zip(&mu) {
            *s += (v - m) * (v - m);
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        for s in stds.row_mut(c) {
            *s = if n >= 2 {
                (*s / (n - 1) as f64).sqrt().max(std_floor)
            } else {
                std_floor
            };
        }
    }
    let priors = counts
        .iter()
        .map(|&c| (c as f64 + 1.0) / (total + n_classes as f64))
        .collect();
    Ok(NbModel {
        priors,
        means,
        stds,
        class_counts: counts,
        class_names: ds.class_names().to_vec(),
        std_floor,
    })
}

impl NbModel {
    pub fn n_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn n_features(&self) -> usize {
        self.means.cols()
    }

    /// `log prior_c + sum_f log N(x_f; mean_cf, std_cf)` per class.
    pub fn log_posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::arg(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.len()
            )));
        }
        Ok((0..self.n_classes())
            .map(|c| {
                if self.class_counts[c] == 0 {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = x
                    .iter()
                    .zip(self.means.row(c))
                    .zip(self.stds.row(c))
                    .map(|((&v, &mu), &sd)| {
                        let z = (v - mu) / sd;
                        -0.5 * z * z - sd.ln() - HALF_LN_2PI
                    })
                    .sum();
                self.priors[c].ln() + ll
            })
            .collect())
    }

    /// Normalized class probabilities (softmax of the log scores).
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.log_posterior(x)?))
    }

    /// Highest-scoring class; the lowest index wins ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let scores = self.log_posterior(x)?;
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = c;
            }
        }
        Ok(best)
    }

    pub fn predict_all(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        x.row_iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_text(&self) -> String {
        let counts: Vec<f64> = self.class_counts.iter().map(|&c| c as f64).collect();
        let mut w = ModelWriter::new("naive-bayes");
        w.scalar("n_classes", self.n_classes())
            .scalar("n_features", self.n_features())
            .scalar("std_floor", format!("{:?}", self.std_floor))
            .scalar("class_names", self.class_names.join(","))
            .vector("priors", &self.priors)
            .vector("class_counts", &counts)
            .matrix("means", &self.means)
            .matrix("stds", &self.stds);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let r = ModelReader::parse(text, "naive-bayes")?;
        let n_classes: usize = r.parsed("n_classes")?;
        let n_features: usize = r.parsed("n_features")?;
        let class_names: Vec<String> = r
            .scalar("class_names")?
            .split(',')
            .map(str::to_string)
            .collect();
        let model = NbModel {
            priors: r.vector("priors")?.to_vec(),
            class_counts: r
                .vector("class_counts")?
                .iter()
                .map(|&c| c as usize)
                .collect(),
            means: r.matrix("means")?.clone(),
            stds: r.matrix("stds")?.clone(),
            std_floor: r.parsed("std_floor")?,
            class_names,
        };
        if model.priors.len() != n_classes
            || model.class_counts.len() != n_classes
            || model.class_names.len() != n_classes
            || model.means.shape() != (n_classes, n_features)
            || model.stds.shape() != (n_classes, n_features)
        {
            return Err(Error::Model(
                "naive Bayes block sizes are inconsistent".into(),
            ));
        }
        Ok(model)
    }
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}
