//! PCA + SMOTE + naive Bayes toolkit for small imbalanced tabular data,
//! with a loader for the UCI Lung-Cancer file.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod naive_bayes;
pub mod pca;
pub mod report;
pub mod rng;
pub mod smote;
pub mod textblock;

pub use config::ExperimentConfig;
pub use dataset::{impute_missing, load_dataset, stratified_folds, Dataset, Imputation};
pub use error::{Error, ErrorKind, Result};
pub use experiment::{evaluate_dataset, run_paper_experiment, ExperimentReport};
pub use linalg::DenseMatrix;
pub use metrics::{ConfusionMatrix, MetricRow};
pub use naive_bayes::{fit_nb, NbModel};
pub use pca::{fit_pca, transform, PcaMode, PcaModel};
pub use rng::Rng;
pub use smote::{balance_sequence, oversample_class, SmoteConfig};
