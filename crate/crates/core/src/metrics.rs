//! Confusion matrices and the one-vs-rest rates derived from them.
//!
//! Rows are actual classes, columns predicted classes. Multiclass scalars
//! are one-vs-rest per class, averaged with weights equal to each class's
//! share of actual samples. A rate whose denominator is zero is reported
//! as 0 and listed in [`MetricRow::undefined`].

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

/// Binary counts with one class treated as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneVsRest {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

pub fn confusion_matrix(
    actual: &[usize],
    predicted: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::arg(format!(
            "{} actual labels but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        if a >= n_classes || p >= n_classes {
            return Err(Error::arg(format!(
                "label pair ({a}, {p}) out of range for {n_classes} classes"
            )));
        }
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = counts.len();
        if counts.iter().any(|r| r.len() != n) {
            return Err(Error::arg("confusion matrix must be square"));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual][predicted]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn row_total(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn column_total(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    /// Adds another matrix of the same size cell by cell.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes() != self.n_classes() {
            return Err(Error::arg("confusion matrices differ in size"));
        }
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .zip(other.counts.iter().flatten())
        {
            *a += b;
        }
        Ok(())
    }

    pub fn one_vs_rest(&self, c: usize) -> Result<OneVsRest> {
        if c >= self.n_classes() {
            return Err(Error::arg(format!(
                "class {c} out of range for {} classes",
                self.n_classes()
            )));
        }
        let tp = self.counts[c][c];
        let fn_ = self.row_total(c) - tp;
        let fp = self.column_total(c) - tp;
        let tn = self.total() - tp - fn_ - fp;
        Ok(OneVsRest { tp, fp, fn_, tn })
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Correct predictions over all predictions.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    ratio(cm.correct(), cm.total())
        .ok_or_else(|| Error::arg("accuracy of an empty confusion matrix"))
}

/// `FP / (TN + FP)`; `None` when the denominator is zero.
pub fn fp_rate(cm: &ConfusionMatrix, c: usize) -> Result<Option<f64>> {
    let o = cm.one_vs_rest(c)?;
    Ok(ratio(o.fp, o.tn + o.fp))
}

/// `TP / (TP + FN)`.
pub fn recall(cm: &ConfusionMatrix, c: usize) -> Result<Option<f64>> {
    let o = cm.one_vs_rest(c)?;
    Ok(ratio(o.tp, o.tp + o.fn_))
}

/// `TP / (TP + FP)`.
pub fn precision(cm: &ConfusionMatrix, c: usize) -> Result<Option<f64>> {
    let o = cm.one_vs_rest(c)?;
    Ok(ratio(o.tp, o.tp + o.fp))
}

/// `sum_c (row_c / total) * metric(c)`.
pub fn weighted_average(cm: &ConfusionMatrix, per_class: &[f64]) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::arg(
            "weighted average over an empty confusion matrix",
        ));
    }
    if per_class.len() != cm.n_classes() {
        return Err(Error::arg("one metric value per class is required"));
    }
    Ok(per_class
        .iter()
        .enumerate()
        .map(|(c, m)| cm.row_total(c) as f64 / total as f64 * m)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerClass {
    pub class: String,
    pub support: u64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
}

/// One evaluated method: the four weighted measures plus counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub method_name: String,
    pub n_features: usize,
    pub n_samples: usize,
    pub accuracy: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub misclassified: usize,
    pub per_class: Vec<PerClass>,
    /// Per-class rates whose denominator was zero, e.g. `precision[TypeB]`.
    pub undefined: Vec<String>,
}

impl MetricRow {
    pub fn from_confusion(
        method_name: &str,
        n_features: usize,
        cm: &ConfusionMatrix,
        class_names: &[String],
    ) -> Result<Self> {
        if class_names.len() != cm.n_classes() {
            return Err(Error::arg(
                "one class name per confusion-matrix row is required",
            ));
        }
        let mut undefined = Vec::new();
        let mut per_class = Vec::with_capacity(cm.n_classes());
        let mut note = |value: Option<f64>, what: &str, c: usize| {
            value.unwrap_or_else(|| {
                undefined.push(format!("{what}[{}]", class_names[c]));
                0.0
            })
        };
        for (c, name) in class_names.iter().enumerate().take(cm.n_classes()) {
            per_class.push(PerClass {
                class: name.clone(),
                support: cm.row_total(c),
                fp_rate: note(fp_rate(cm, c)?, "fp_rate", c),
                precision: note(precision(cm, c)?, "precision", c),
                recall: note(recall(cm, c)?, "recall", c),
            });
        }
        let pick = |f: fn(&PerClass) -> f64| -> Vec<f64> { per_class.iter().map(f).collect() };
        Ok(MetricRow {
            method_name: method_name.to_string(),
            n_features,
            n_samples: cm.total() as usize,
            accuracy: accuracy(cm)?,
            fp_rate: weighted_average(cm, &pick(|p| p.fp_rate))?,
            precision: weighted_average(cm, &pick(|p| p.precision))?,
            recall: weighted_average(cm, &pick(|p| p.recall))?,
            misclassified: misclassified_count(cm),
            per_class,
            undefined,
        })
    }
}

/// Samples whose prediction differs from the actual class.
pub fn misclassified_count(cm: &ConfusionMatrix) -> usize {
    (cm.total() - cm.correct()) as usize
}
