//! Principal component analysis with component selection by cumulative
//! explained variance.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{
    correlation_matrix, covariance_matrix, floored, jacobi_eigen, mean_vector, std_vector,
    DenseMatrix,
};
use crate::textblock::{ModelReader, ModelWriter};

/// Slack on the coverage comparison so that a threshold of 1.0 is met once
/// every nonzero eigenvalue is included, despite rounding in the sums.
const COVERAGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcaMode {
    /// Eigenvectors of the covariance matrix; features are only centered.
    Covariance,
    /// Eigenvectors of the correlation matrix; features are standardized.
    Correlation,
}

impl PcaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PcaMode::Covariance => "covariance",
            PcaMode::Correlation => "correlation",
        }
    }
}

impl std::str::FromStr for PcaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "covariance" => Ok(PcaMode::Covariance),
            "correlation" => Ok(PcaMode::Correlation),
            _ => Err(Error::Config(format!(
                "unknown PCA mode `{s}` (expected covariance or correlation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Divisor applied after centering; all ones in covariance mode.
    pub scale: Vec<f64>,
    /// n_features x retained; columns are the leading eigenvectors.
    pub components: DenseMatrix,
    /// Every eigenvalue, descending.
    pub eigenvalues: Vec<f64>,
    pub retained: usize,
    pub variance_threshold: f64,
    pub mode: PcaMode,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Fraction of total variance covered by the first `m` components.
    pub fn cumulative_variance(&self, m: usize) -> f64 {
        cumulative_ratios(&self.eigenvalues)
            .get(m.saturating_sub(1))
            .copied()
            .unwrap_or(if m == 0 { 0.0 } else { 1.0 })
    }

    pub fn explained_variance_ratios(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().map(|l| l.max(0.0)).sum();
        self.eigenvalues
            .iter()
            .map(|l| if total > 0.0 { l.max(0.0) / total } else { 0.0 })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut w = ModelWriter::new("pca");
        w.scalar("mode", self.mode.as_str())
            .scalar(
                "variance_threshold",
                format!("{:?}", self.variance_threshold),
            )
            .scalar("n_features", self.n_features())
            .scalar("retained", self.retained)
            .vector("mean", &self.mean)
            .vector("scale", &self.scale)
            .vector("eigenvalues", &self.eigenvalues)
            .matrix("components", &self.components);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let r = ModelReader::parse(text, "pca")?;
        let n: usize = r.parsed("n_features")?;
        let model = PcaModel {
            mode: r
                .parsed("mode")
                .map_err(|_| Error::Model("invalid mode".into()))?,
            variance_threshold: r.parsed("variance_threshold")?,
            retained: r.parsed("retained")?,
            mean: r.vector("mean")?.to_vec(),
            scale: r.vector("scale")?.to_vec(),
            eigenvalues: r.vector("eigenvalues")?.to_vec(),
            components: r.matrix("components")?.clone(),
        };
        if model.mean.len() != n
            || model.scale.len() != n
            || model.eigenvalues.len() != n
            || model.components.shape() != (n, model.retained)
        {
            return Err(Error::Model("PCA block sizes are inconsistent".into()));
        }
        Ok(model)
    }
}

fn cumulative_ratios(eigenvalues: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut acc = 0.0;
    clipped
        .iter()
        .map(|l| {
            acc += l;
            if total > 0.0 {
                acc / total
            } else {
                1.0
            }
        })
        .collect()
}

/// Smallest component count whose cumulative variance ratio reaches
/// `threshold`. Negative eigenvalues (rounding noise) count as zero.
pub fn components_for_threshold(eigenvalues: &[f64], threshold: f64) -> usize {
    if eigenvalues.is_empty() {
        return 0;
    }
    cumulative_ratios(eigenvalues)
        .iter()
        .position(|&c| c >= threshold - COVERAGE_SLACK)
        .map_or(eigenvalues.len(), |i| i + 1)
}

pub fn fit_pca(ds: &Dataset, threshold: f64, mode: PcaMode) -> Result<PcaModel> {
    fit_pca_matrix(ds.features(), threshold, mode)
}

pub fn fit_pca_matrix(x: &DenseMatrix, threshold: f64, mode: PcaMode) -> Result<PcaModel> {
    if x.rows() < 2 {
        return Err(Error::arg(format!(
            "PCA needs at least 2 samples, got {}",
            x.rows()
        )));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::arg(format!(
            "variance threshold must lie in (0, 1], got {threshold}"
        )));
    }
    if x.cols() == 0 {
        return Err(Error::arg("PCA needs at least one feature"));
    }
    let mean = mean_vector(x)?;
    let (matrix, scale) = match mode {
        PcaMode::Covariance => (covariance_matrix(x)?, vec![1.0; x.cols()]),
        PcaMode::Correlation => {
            let sd = std_vector(x)?;
            (
                correlation_matrix(x)?,
                sd.into_iter().map(floored).collect(),
            )
        }
    };
    let eig = jacobi_eigen(&matrix)?;
    let retained = components_for_threshold(&eig.eigenvalues, threshold).max(1);
    Ok(PcaModel {
        mean,
        scale,
        components: eig.eigenvectors.leading_columns(retained),
        eigenvalues: eig.eigenvalues,
        retained,
        variance_threshold: threshold,
        mode,
    })
}

/// Projects a feature matrix: `((x - mean) / scale) * components`.
pub fn project(model: &PcaModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != model.n_features() {
        return Err(Error::arg(format!(
            "PCA model expects {} features, dataset has {}",
            model.n_features(),
            x.cols()
        )));
    }
    let mut z = x.clone();
    for i in 0..z.rows() {
        for ((v, mu), s) in z.row_mut(i).iter_mut().zip(&model.mean).zip(&model.scale) {
            *v = (*v - mu) / s;
        }
    }
    z.matmul(&model.components)
}

/// Projects a dataset; labels carry through and features become `PC1..PCm`.
pub fn transform(model: &PcaModel, ds: &Dataset) -> Result<Dataset> {
    let projected = project(model, ds.features())?;
    let names = (1..=model.retained).map(|i| format!("PC{i}")).collect();
    ds.with_features(
        projected,
        names,
        format!(
            "{} | pca({}, {})",
            ds.provenance(),
            model.mode.as_str(),
            model.retained
        ),
    )
}
