//! Cross-validated evaluation and the five-step PCA + SMOTE experiment.

use std::collections::BTreeMap;
use std::fs;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{resolve_classes, ExperimentConfig, PcaScope, Protocol, ResampleScope};
use crate::dataset::{impute_missing, load_dataset, stratified_folds, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{confusion_matrix, ConfusionMatrix, MetricRow, PerClass};
use crate::naive_bayes::fit_nb_with_floor;
use crate::pca::{fit_pca, fit_pca_matrix, project, PcaMode};
use crate::rng::Rng;
use crate::smote::{balance_sequence, oversample_class, SmoteConfig};

pub const REPORT_SCHEMA: &str = "pcasmote-report/1";

/// Work redone inside every training split before the classifier is fit.
#[derive(Debug, Clone, Default)]
pub struct FoldPrep {
    /// Fit PCA on the training split and project both splits.
    pub pca: Option<(f64, PcaMode)>,
    /// Oversample the training split.
    pub smote: Option<FoldSmote>,
}

/// SMOTE applied to a training split. The per-class target is scaled by
/// the split's share of the full dataset, `round(target * n_train / n)`,
/// and never shrinks a class.
#[derive(Debug, Clone)]
pub struct FoldSmote {
    pub order: Vec<usize>,
    pub per_class_target: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub protocol: Protocol,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub std_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub row: MetricRow,
    pub confusion: ConfusionMatrix,
}

/// The four weighted measures plus the misclassified count, as reals so
/// they can be averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub misclassified: f64,
}

impl MetricSummary {
    fn of(row: &MetricRow) -> Self {
        MetricSummary {
            accuracy: row.accuracy,
            fp_rate: row.fp_rate,
            precision: row.precision,
            recall: row.recall,
            misclassified: row.misclassified as f64,
        }
    }

    fn fold(rows: &[MetricSummary], f: fn(f64, f64) -> f64) -> Self {
        let pick = |g: fn(&MetricSummary) -> f64| rows.iter().map(g).reduce(f).unwrap_or(f64::NAN);
        MetricSummary {
            accuracy: pick(|r| r.accuracy),
            fp_rate: pick(|r| r.fp_rate),
            precision: pick(|r| r.precision),
            recall: pick(|r| r.recall),
            misclassified: pick(|r| r.misclassified),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    /// Mean over seeds. `misclassified` is `n - round(mean accuracy * n)`.
    pub mean: MetricRow,
    pub min: MetricSummary,
    pub max: MetricSummary,
    pub median_misclassified: f64,
    pub per_seed: Vec<SeedResult>,
}

impl Evaluation {
    pub fn misclassified_counts(&self) -> Vec<usize> {
        self.per_seed.iter().map(|s| s.row.misclassified).collect()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Cross-validates Gaussian naive Bayes on `ds` once per seed.
///
/// Every seed builds its own stratified folds, predicts each held-out fold
/// with a model fit on the rest, and scores the pooled predictions as one
/// confusion matrix.
pub fn evaluate_dataset(
    ds: &Dataset,
    method: &str,
    settings: &EvalSettings,
    prep: &FoldPrep,
) -> Result<Evaluation> {
    if settings.seeds.is_empty() {
        return Err(Error::arg("evaluation needs at least one seed"));
    }
    let per_seed: Vec<SeedResult> = settings
        .seeds
        .par_iter()
        .map(|&seed| evaluate_seed(ds, method, settings, prep, seed))
        .collect::<Result<_>>()?;

    let summaries: Vec<MetricSummary> =
        per_seed.iter().map(|s| MetricSummary::of(&s.row)).collect();
    let n_seeds = per_seed.len() as f64;
    let mean_summary = MetricSummary::fold(&summaries, |a, b| a + b);
    let n_eval = per_seed[0].row.n_samples;
    let mean_acc = mean_summary.accuracy / n_seeds;

    let n_classes = ds.n_classes();
    let per_class: Vec<PerClass> = (0..n_classes)
        .map(|c| {
            let avg = |g: fn(&PerClass) -> f64| {
                per_seed.iter().map(|s| g(&s.row.per_class[c])).sum::<f64>() / n_seeds
            };
            PerClass {
                class: ds.class_names()[c].clone(),
                support: per_seed[0].row.per_class[c].support,
                fp_rate: avg(|p| p.fp_rate),
                precision: avg(|p| p.precision),
                recall: avg(|p| p.recall),
            }
        })
        .collect();
    let mut flag_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &per_seed {
        for f in &s.row.undefined {
            *flag_counts.entry(f.as_str()).or_default() += 1;
        }
    }
    let undefined = flag_counts
        .into_iter()
        .map(|(f, n)| format!("{f} ({n}/{} seeds)", per_seed.len()))
        .collect();

    let n_features = {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for s in &per_seed {
            *counts.entry(s.row.n_features).or_default() += 1;
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map_or(ds.n_features(), |(f, _)| f)
    };
    let mean = MetricRow {
        method_name: method.to_string(),
        n_features,
        n_samples: n_eval,
        accuracy: mean_acc,
        fp_rate: mean_summary.fp_rate / n_seeds,
        precision: mean_summary.precision / n_seeds,
        recall: mean_summary.recall / n_seeds,
        misclassified: n_eval - (mean_acc * n_eval as f64).round() as usize,
        per_class,
        undefined,
    };
    let misclassified: Vec<f64> = summaries.iter().map(|s| s.misclassified).collect();
    Ok(Evaluation {
        mean,
        min: MetricSummary::fold(&summaries, f64::min),
        max: MetricSummary::fold(&summaries, f64::max),
        median_misclassified: median(&misclassified),
        per_seed,
    })
}

fn evaluate_seed(
    ds: &Dataset,
    method: &str,
    settings: &EvalSettings,
    prep: &FoldPrep,
    seed: u64,
) -> Result<SeedResult> {
    let k = match settings.protocol {
        Protocol::KFold => settings.k,
        Protocol::LeaveOneOut => ds.n_samples(),
    };
    let folds = stratified_folds(ds, k, seed)?;
    let mut predicted = vec![usize::MAX; ds.n_samples()];
    let mut feature_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for f in 0..folds.k {
        let test_idx = folds.test_indices(f);
        if test_idx.is_empty() {
            continue;
        }
        let mut train = ds.subset(&folds.train_indices(f));
        let mut test = ds.subset(&test_idx);
        if let Some((threshold, mode)) = prep.pca {
            let model = fit_pca_matrix(train.features(), threshold, mode)?;
            let names: Vec<String> = (1..=model.retained).map(|i| format!("PC{i}")).collect();
            train =
                train.with_features(project(&model, train.features())?, names.clone(), "fold")?;
            test = test.with_features(project(&model, test.features())?, names, "fold")?;
        }
        if let Some(plan) = &prep.smote {
            let fold_seed = Rng::derive(Rng::derive(plan.seed, seed), f as u64);
            train = oversample_training_split(&train, plan, ds.n_samples(), fold_seed)?;
        }
        *feature_counts.entry(train.n_features()).or_default() += 1;
        let model = fit_nb_with_floor(&train, settings.std_floor)?;
        for (row, &i) in test.features().row_iter().zip(&test_idx) {
            predicted[i] = model.predict(row)?;
        }
    }
    let cm = confusion_matrix(ds.labels(), &predicted, ds.n_classes())?;
    let n_features = feature_counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map_or(ds.n_features(), |(f, _)| f);
    let row = MetricRow::from_confusion(method, n_features, &cm, ds.class_names())?;
    Ok(SeedResult {
        seed,
        row,
        confusion: cm,
    })
}

fn oversample_training_split(
    train: &Dataset,
    plan: &FoldSmote,
    n_total: usize,
    seed: u64,
) -> Result<Dataset> {
    let scaled =
        (plan.per_class_target as f64 * train.n_samples() as f64 / n_total as f64).round() as usize;
    let mut out = train.clone();
    for (i, &class) in plan.order.iter().enumerate() {
        let current = out.class_counts()[class];
        let cfg = SmoteConfig {
            k: plan.k,
            target_class: class,
            target_count: scaled.max(current),
            seed: Rng::derive(seed, i as u64),
        };
        out = oversample_class(&out, &cfg)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StepResult {
    pub method: String,
    pub n_features: usize,
    pub n_samples: usize,
    pub class_counts: Vec<usize>,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub toolkit_version: String,
    pub dataset_sha256: String,
    pub dataset_samples: usize,
    pub dataset_features: usize,
    pub missing_cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaSummary {
    pub mode: PcaMode,
    pub threshold: f64,
    pub retained: usize,
    pub correlation_retained: usize,
    pub covariance_retained: usize,
    pub eigenvalues: Vec<f64>,
    pub cumulative_variance: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: BTreeMap<String, String>,
    pub environment: Environment,
    pub pca: PcaSummary,
    pub steps: Vec<StepResult>,
}

impl ExperimentReport {
    pub fn step(&self, method: &str) -> Option<&StepResult> {
        self.steps.iter().find(|s| s.method == method)
    }
}

/// Runs Initial, PCA and one SMOTE step per entry of `smote.order`.
pub fn run_paper_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let bytes = fs::read(&cfg.dataset_path).map_err(|e| Error::io(&cfg.dataset_path, e))?;
    let checksum = format!("{:x}", Sha256::digest(&bytes));
    let raw = load_dataset(&cfg.dataset_path).map_err(|e| e.in_step("load"))?;
    let ds = impute_missing(&raw, cfg.imputation).map_err(|e| e.in_step("impute"))?;
    run_on_dataset(cfg, &ds, checksum, raw.missing_cells().len())
}

/// As [`run_paper_experiment`], on an already loaded and imputed dataset.
pub fn run_on_dataset(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    dataset_sha256: String,
    missing_cells: usize,
) -> Result<ExperimentReport> {
    let order = resolve_classes(ds, &cfg.smote.order)?;
    let settings = EvalSettings {
        protocol: cfg.eval.protocol,
        k: cfg.eval.k,
        seeds: cfg.eval.seeds.clone(),
        std_floor: cfg.std_floor,
    };
    let fold_pca =
        (cfg.pca.scope == PcaScope::TrainFolds).then_some((cfg.pca.threshold, cfg.pca.mode));

    let mut steps = Vec::new();
    let initial = evaluate_dataset(ds, "Initial", &settings, &FoldPrep::default())
        .map_err(|e| e.in_step("Initial"))?;
    steps.push(step("Initial", ds, initial));

    let model = fit_pca(ds, cfg.pca.threshold, cfg.pca.mode).map_err(|e| e.in_step("PCA"))?;
    let retained_in = |mode: PcaMode| -> Result<usize> {
        if mode == cfg.pca.mode {
            Ok(model.retained)
        } else {
            Ok(fit_pca(ds, cfg.pca.threshold, mode)?.retained)
        }
    };
    let pca_summary = PcaSummary {
        mode: cfg.pca.mode,
        threshold: cfg.pca.threshold,
        retained: model.retained,
        correlation_retained: retained_in(PcaMode::Correlation).map_err(|e| e.in_step("PCA"))?,
        covariance_retained: retained_in(PcaMode::Covariance).map_err(|e| e.in_step("PCA"))?,
        cumulative_variance: (1..=model.eigenvalues.len())
            .map(|m| model.cumulative_variance(m))
            .collect(),
        eigenvalues: model.eigenvalues.clone(),
    };
    let reduced = crate::pca::transform(&model, ds).map_err(|e| e.in_step("PCA"))?;

    let (pca_input, pca_prep) = match fold_pca {
        Some(p) => (
            ds,
            FoldPrep {
                pca: Some(p),
                smote: None,
            },
        ),
        None => (&reduced, FoldPrep::default()),
    };
    let pca_eval =
        evaluate_dataset(pca_input, "PCA", &settings, &pca_prep).map_err(|e| e.in_step("PCA"))?;
    steps.push(step("PCA", &reduced, pca_eval));

    let runs = balance_sequence(
        &reduced,
        &order,
        cfg.smote.per_class_target,
        cfg.smote.k,
        cfg.smote.seed,
    )
    .map_err(|e| e.in_step("SMOTE"))?;
    for (i, resampled) in runs.iter().enumerate() {
        let name = format!("SMOTE{}", i + 1);
        let evaluation = match cfg.eval.resample_scope {
            ResampleScope::WholeDataset => {
                evaluate_dataset(resampled, &name, &settings, &FoldPrep::default())
            }
            ResampleScope::TrainFoldsOnly => {
                let prep = FoldPrep {
                    pca: fold_pca,
                    smote: Some(FoldSmote {
                        order: order[..=i].to_vec(),
                        per_class_target: cfg.smote.per_class_target,
                        k: cfg.smote.k,
                        seed: cfg.smote.seed,
                    }),
                };
                evaluate_dataset(pca_input, &name, &settings, &prep)
            }
        }
        .map_err(|e| e.in_step(name.clone()))?;
        steps.push(step(&name, resampled, evaluation));
    }

    Ok(ExperimentReport {
        schema: REPORT_SCHEMA.to_string(),
        config: cfg.to_pairs().into_iter().collect(),
        environment: Environment {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_sha256,
            dataset_samples: ds.n_samples(),
            dataset_features: ds.n_features(),
            missing_cells,
        },
        pca: pca_summary,
        steps,
    })
}

fn step(method: &str, ds: &Dataset, evaluation: Evaluation) -> StepResult {
    StepResult {
        method: method.to_string(),
        n_features: ds.n_features(),
        n_samples: ds.n_samples(),
        class_counts: ds.class_counts(),
        evaluation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn separable() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..3 {
            for i in 0..8 {
                rows.push(vec![
                    c as f64 * 100.0 + i as f64 * 0.1,
                    -(c as f64) * 50.0 + (i % 3) as f64,
                ]);
                labels.push(c);
            }
        }
        Dataset::new(
            DenseMatrix::from_rows(&rows).unwrap(),
            labels,
            vec!["A".into(), "B".into(), "C".into()],
            vec!["x".into(), "y".into()],
            "toy",
        )
        .unwrap()
    }

    fn settings(protocol: Protocol) -> EvalSettings {
        EvalSettings {
            protocol,
            k: 4,
            seeds: vec![1, 2, 3],
            std_floor: 1e-6,
        }
    }

    #[test]
    fn separable_data_is_perfect_under_both_protocols() {
        let ds = separable();
        for p in [Protocol::KFold, Protocol::LeaveOneOut] {
            let e = evaluate_dataset(&ds, "toy", &settings(p), &FoldPrep::default()).unwrap();
            assert_eq!(e.mean.accuracy, 1.0);
            assert_eq!(e.mean.fp_rate, 0.0);
            assert_eq!(e.median_misclassified, 0.0);
        }
    }

    #[test]
    fn leave_one_out_pools_every_sample() {
        let ds = separable();
        let e = evaluate_dataset(
            &ds,
            "toy",
            &settings(Protocol::LeaveOneOut),
            &FoldPrep::default(),
        )
        .unwrap();
        for s in &e.per_seed {
            assert_eq!(s.confusion.total(), 24);
        }
    }

    #[test]
    fn fold_prep_paths_run() {
        let ds = separable();
        let prep = FoldPrep {
            pca: Some((0.9, PcaMode::Correlation)),
            smote: Some(FoldSmote {
                order: vec![0, 2],
                per_class_target: 12,
                k: 3,
                seed: 4,
            }),
        };
        let e = evaluate_dataset(&ds, "toy", &settings(Protocol::KFold), &prep).unwrap();
        assert_eq!(e.mean.n_samples, 24);
        assert!(e.mean.accuracy > 0.9);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}
