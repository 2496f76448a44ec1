//! Tabular datasets: the UCI Lung-Cancer loader, missing-value imputation,
//! the canonical CSV export and stratified fold assignment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::Rng;

/// Marker for a missing cell in the UCI and canonical CSV formats.
pub const MISSING_MARKER: &str = "?";

pub const LUNG_CANCER_FEATURES: usize = 56;
pub const LUNG_CANCER_CLASSES: [&str; 3] = ["TypeA", "TypeB", "TypeC"];

/// Feature matrix plus integer labels.
///
/// Missing cells hold `0.0` in `features` and are listed in `missing`
/// (sorted, row-major) until [`impute_missing`] fills them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DenseMatrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
    provenance: String,
    missing: Vec<(usize, usize)>,
}

impl Dataset {
    pub fn new(
        features: DenseMatrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        Self::with_missing(
            features,
            labels,
            class_names,
            feature_names,
            provenance,
            Vec::new(),
        )
    }

    fn with_missing(
        features: DenseMatrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
        provenance: impl Into<String>,
        mut missing: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::arg(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if features.cols() != feature_names.len() {
            return Err(Error::arg(format!(
                "{} feature columns but {} feature names",
                features.cols(),
                feature_names.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Domain(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        missing.sort_unstable();
        missing.dedup();
        if let Some(&(r, c)) = missing
            .iter()
            .find(|&&(r, c)| r >= features.rows() || c >= features.cols())
        {
            return Err(Error::arg(format!("missing cell ({r}, {c}) out of range")));
        }
        Ok(Dataset {
            features,
            labels,
            class_names,
            feature_names,
            provenance: provenance.into(),
            missing,
        })
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn missing_cells(&self) -> &[(usize, usize)] {
        &self.missing
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Per-class sample counts in `class_names` order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Sample indices of one class, ascending.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let position: BTreeMap<usize, usize> = indices
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let missing = self
            .missing
            .iter()
            .filter_map(|&(r, c)| position.get(&r).map(|&nr| (nr, c)))
            .collect();
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
            missing,
        }
    }

    /// Same samples and labels with a replacement feature matrix.
    pub fn with_features(
        &self,
        features: DenseMatrix,
        feature_names: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Dataset> {
        Dataset::new(
            features,
            self.labels.clone(),
            self.class_names.clone(),
            feature_names,
            provenance,
        )
    }

    /// Appends rows with the given label. Only valid on complete datasets.
    pub(crate) fn append_rows(&mut self, rows: &[Vec<f64>], label: usize) -> Result<()> {
        if label >= self.n_classes() {
            return Err(Error::Domain(format!("label {label} out of range")));
        }
        for r in rows {
            self.features.push_row(r)?;
            self.labels.push(label);
        }
        Ok(())
    }

    /// Writes the canonical CSV export: a header of feature names then
    /// `class`, one row per sample, class emitted by name. Values use the
    /// shortest representation that parses back to the same `f64`;
    /// missing cells are written as `?`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("class");
        w.write_record(&header)?;
        let mut missing = self.missing.iter().peekable();
        for (i, row) in self.features.row_iter().enumerate() {
            let mut record: Vec<String> = Vec::with_capacity(row.len() + 1);
            for (j, v) in row.iter().enumerate() {
                if missing.peek() == Some(&&(i, j)) {
                    missing.next();
                    record.push(MISSING_MARKER.to_string());
                } else {
                    record.push(format!("{v:?}"));
                }
            }
            record.push(self.class_names[self.labels[i]].clone());
            w.write_record(&record)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::arg(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    /// Parses the canonical CSV export. Class names are taken from
    /// `class_names` when given (fixing label order), otherwise in order of
    /// first appearance.
    pub fn from_csv_str(
        text: &str,
        class_names: Option<&[String]>,
        provenance: &str,
    ) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[header.len() - 1] != "class" {
            return Err(Error::Parse {
                line: 1,
                message: "header must list feature names followed by `class`".into(),
            });
        }
        let feature_names: Vec<String> = header
            .iter()
            .take(header.len() - 1)
            .map(str::to_string)
            .collect();
        let p = feature_names.len();
        let mut names: Vec<String> = class_names.map(<[String]>::to_vec).unwrap_or_default();
        let fixed = class_names.is_some();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        let mut missing = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != p + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", p + 1, rec.len()),
                });
            }
            for (j, field) in rec.iter().take(p).enumerate() {
                if field == MISSING_MARKER {
                    missing.push((i, j));
                    data.push(0.0);
                } else {
                    let v: f64 = field.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("invalid number `{field}` in column {}", j + 1),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line,
                            message: format!("non-finite value `{field}`"),
                        });
                    }
                    data.push(v);
                }
            }
            let class = &rec[p];
            let label = match names.iter().position(|c| c == class) {
                Some(l) => l,
                None if !fixed => {
                    names.push(class.to_string());
                    names.len() - 1
                }
                None => {
                    return Err(Error::Domain(format!(
                        "line {line}: unknown class `{class}`"
                    )))
                }
            };
            labels.push(label);
        }
        let features = DenseMatrix::from_vec(labels.len(), p, data)?;
        Dataset::with_missing(features, labels, names, feature_names, provenance, missing)
    }

    pub fn read_csv(path: &Path, class_names: Option<&[String]>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, class_names, &path.display().to_string())
    }
}

/// Parses the UCI Lung-Cancer `.data` format: comma separated, class label
/// (1, 2 or 3) first, then 56 integer attribute codes or `?`. Blank lines
/// are skipped.
pub fn parse_uci_lung_cancer(text: &str, provenance: &str) -> Result<Dataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut missing = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != LUNG_CANCER_FEATURES + 1 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    LUNG_CANCER_FEATURES + 1,
                    fields.len()
                ),
            });
        }
        let label = match fields[0] {
            "1" => 0,
            "2" => 1,
            "3" => 2,
            other => {
                return Err(Error::Domain(format!(
                    "line {line}: unknown class label `{other}`"
                )))
            }
        };
        let row = labels.len();
        for (j, f) in fields[1..].iter().enumerate() {
            if *f == MISSING_MARKER {
                missing.push((row, j));
                data.push(0.0);
            } else {
                let code: i64 = f.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("attribute {} is not an integer code: `{f}`", j + 2),
                })?;
                data.push(code as f64);
            }
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no samples in input".into(),
        });
    }
    let features = DenseMatrix::from_vec(labels.len(), LUNG_CANCER_FEATURES, data)?;
    let ds = Dataset::with_missing(
        features,
        labels,
        LUNG_CANCER_CLASSES.iter().map(|s| s.to_string()).collect(),
        lung_cancer_feature_names(),
        provenance,
        missing,
    )?;
    Ok(ds)
}

/// Feature names `A1`..`A56`; `A1` is UCI attribute 2 (attribute 1 is the class).
pub fn lung_cancer_feature_names() -> Vec<String> {
    (1..=LUNG_CANCER_FEATURES)
        .map(|i| format!("A{i}"))
        .collect()
}

pub fn load_uci_lung_cancer(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_uci_lung_cancer(&text, &format!("uci:{}", path.display()))
}

/// Loads either format: `.csv` files are read as the canonical export,
/// anything else as UCI `.data`.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Dataset::read_csv(path, None),
        _ => load_uci_lung_cancer(path),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Imputation {
    /// Most frequent observed value; ties go to the smallest value.
    Mode,
    Mean,
}

impl std::str::FromStr for Imputation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode" | "per-feature-mode" => Ok(Imputation::Mode),
            "mean" | "per-feature-mean" => Ok(Imputation::Mean),
            _ => Err(Error::Config(format!(
                "unknown imputation strategy `{s}` (expected mode or mean)"
            ))),
        }
    }
}

impl Imputation {
    pub fn as_str(self) -> &'static str {
        match self {
            Imputation::Mode => "mode",
            Imputation::Mean => "mean",
        }
    }
}

/// Fills every missing cell with a per-feature statistic of the observed
/// values in that column.
pub fn impute_missing(ds: &Dataset, strategy: Imputation) -> Result<Dataset> {
    if ds.missing.is_empty() {
        return Ok(ds.clone());
    }
    let n = ds.n_samples();
    let mut is_missing = vec![false; n * ds.n_features()];
    for &(r, c) in &ds.missing {
        is_missing[r * ds.n_features() + c] = true;
    }
    let mut features = ds.features.clone();
    let mut cols: Vec<usize> = ds.missing.iter().map(|&(_, c)| c).collect();
    cols.sort_unstable();
    cols.dedup();
    for c in cols {
        let observed: Vec<f64> = (0..n)
            .filter(|&r| !is_missing[r * ds.n_features() + c])
            .map(|r| ds.features[(r, c)])
            .collect();
        if observed.is_empty() {
            return Err(Error::Imputation {
                feature: ds.feature_names[c].clone(),
            });
        }
        let fill = match strategy {
            Imputation::Mode => mode_smallest(&observed),
            Imputation::Mean => observed.iter().sum::<f64>() / observed.len() as f64,
        };
        for r in 0..n {
            if is_missing[r * ds.n_features() + c] {
                features[(r, c)] = fill;
            }
        }
    }
    Ok(Dataset {
        features,
        labels: ds.labels.clone(),
        class_names: ds.class_names.clone(),
        feature_names: ds.feature_names.clone(),
        provenance: ds.provenance.clone(),
        missing: Vec::new(),
    })
}

fn mode_smallest(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut best, mut best_run) = (sorted[0], 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        // strict comparison keeps the smaller value on ties
        if j - i > best_run {
            best = sorted[i];
            best_run = j - i;
        }
        i = j;
    }
    best
}

/// Fold index per sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub fold_of_sample: Vec<usize>,
    pub k: usize,
}

impl FoldAssignment {
    /// Sample indices in fold `f`, ascending.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of_sample.len())
            .filter(|&i| self.fold_of_sample[i] == f)
            .collect()
    }

    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of_sample.len())
            .filter(|&i| self.fold_of_sample[i] != f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_sample {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Each class's samples are shuffled with a [`Rng`] seeded by `seed`, then
/// dealt round-robin into folds. The dealing position carries over from one
/// class to the next, so overall fold sizes also differ by at most one.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::arg(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    if k > ds.n_samples() {
        return Err(Error::arg(format!(
            "fold count {k} exceeds sample count {}",
            ds.n_samples()
        )));
    }
    let mut rng = Rng::new(seed);
    let mut fold_of_sample = vec![0; ds.n_samples()];
    let mut offset = 0;
    for class in 0..ds.n_classes() {
        let mut members = ds.class_indices(class);
        rng.shuffle(&mut members);
        for (r, &i) in members.iter().enumerate() {
            fold_of_sample[i] = (offset + r) % k;
        }
        offset += members.len();
    }
    Ok(FoldAssignment { fold_of_sample, k })
}
