//! Experiment configuration.
//!
//! The native format is flat `key = value` text with dotted keys; `#`
//! starts a comment. JSON is accepted too: nested objects flatten to the
//! same dotted keys. Unknown keys are rejected.
//!
//! | key                     | default                | values                               |
//! |-------------------------|------------------------|--------------------------------------|
//! | `dataset.path`          | `data/lung-cancer.data`| UCI `.data` or canonical `.csv`      |
//! | `dataset.imputation`    | `mode`                 | `mode`, `mean`                       |
//! | `pca.threshold`         | `0.9`                  | (0, 1]                               |
//! | `pca.mode`              | `correlation`          | `correlation`, `covariance`          |
//! | `pca.scope`             | `whole-dataset`        | `whole-dataset`, `train-folds`       |
//! | `smote.k`               | `5`                    | >= 1                                 |
//! | `smote.order`           | `A,C,B`                | class names, name suffixes or indices|
//! | `smote.per_class_target`| `18`                   | >= 1                                 |
//! | `smote.seed`            | `1`                    | u64                                  |
//! | `nb.std_floor`          | `1e-6`                 | > 0                                  |
//! | `eval.protocol`         | `k-fold`               | `k-fold`, `leave-one-out`            |
//! | `eval.k`                | `10`                   | >= 2                                 |
//! | `eval.seeds`            | `1..=20`               | comma list of u64 and `a..=b` ranges |
//! | `eval.resample_scope`   | `whole-dataset`        | `whole-dataset`, `train-folds-only`  |

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::dataset::{Dataset, Imputation};
use crate::error::{Error, Result};
use crate::naive_bayes::STD_FLOOR;
use crate::pca::PcaMode;
use crate::smote::DEFAULT_K;

pub const KEYS: [&str; 14] = [
    "dataset.path",
    "dataset.imputation",
    "pca.threshold",
    "pca.mode",
    "pca.scope",
    "smote.k",
    "smote.order",
    "smote.per_class_target",
    "smote.seed",
    "nb.std_floor",
    "eval.protocol",
    "eval.k",
    "eval.seeds",
    "eval.resample_scope",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    KFold,
    LeaveOneOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleScope {
    /// Resample once, then cross-validate the resampled dataset.
    WholeDataset,
    /// Resample each training split only; test folds hold original rows.
    TrainFoldsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcaScope {
    WholeDataset,
    TrainFolds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub protocol: Protocol,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub resample_scope: ResampleScope,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            protocol: Protocol::KFold,
            k: 10,
            seeds: (1..=20).collect(),
            resample_scope: ResampleScope::WholeDataset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaConfig {
    pub threshold: f64,
    pub mode: PcaMode,
    pub scope: PcaScope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoteSettings {
    pub k: usize,
    pub order: Vec<String>,
    pub per_class_target: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub imputation: Imputation,
    pub pca: PcaConfig,
    pub smote: SmoteSettings,
    pub std_floor: f64,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset_path: PathBuf::from("data/lung-cancer.data"),
            imputation: Imputation::Mode,
            pca: PcaConfig {
                threshold: 0.9,
                mode: PcaMode::Correlation,
                scope: PcaScope::WholeDataset,
            },
            smote: SmoteSettings {
                k: DEFAULT_K,
                order: vec!["A".into(), "C".into(), "B".into()],
                per_class_target: 18,
                seed: 1,
            },
            std_floor: STD_FLOOR,
            eval: EvalConfig::default(),
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> Error {
    Error::Config(format!("`{key}` = `{value}`: {why}"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(key, value, "not a valid number"))
}

fn parse_seeds(key: &str, value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..=") {
            let (a, b): (u64, u64) = (num(key, a.trim())?, num(key, b.trim())?);
            if a > b {
                return Err(bad(key, value, "empty seed range"));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(num(key, part)?);
        }
    }
    Ok(seeds)
}

fn format_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds.len() > 2 && seeds.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}..={}", seeds[0], seeds[seeds.len() - 1])
    } else {
        seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Splits flat `key = value` text into pairs. Blank lines and `#` comments
/// are ignored.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected `key = value`, found `{line}`",
                i + 1
            ))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Flattens a JSON object into dotted key/value pairs. Arrays become comma
/// lists.
pub fn flatten_json(text: &str) -> Result<Vec<(String, String)>> {
    fn scalar(v: &serde_json::Value) -> Option<String> {
        match v {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Number(n) => Some(n.to_string()),
            serde_json::Value::Bool(b) => Some(b.to_string()),
            _ => None,
        }
    }
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) -> Result<()> {
        match v {
            serde_json::Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, child, out)?;
                }
            }
            serde_json::Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| {
                    Error::Config(format!("`{prefix}`: arrays may only hold scalars"))
                })?;
                out.push((prefix.to_string(), parts.join(",")));
            }
            other => match scalar(other) {
                Some(s) => out.push((prefix.to_string(), s)),
                None => return Err(Error::Config(format!("`{prefix}`: null is not a value"))),
            },
        }
        Ok(())
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    if !value.is_object() {
        return Err(Error::Config("JSON config must be an object".into()));
    }
    let mut out = Vec::new();
    walk("", &value, &mut out)?;
    Ok(out)
}

impl ExperimentConfig {
    /// Reads a config file (JSON when the extension is `.json` or the text
    /// starts with `{`). A relative `dataset.path` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json =
            path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        let pairs = if is_json {
            flatten_json(&text)?
        } else {
            parse_key_values(&text)?
        };
        let mut cfg = ExperimentConfig::default();
        let base = path.parent().unwrap_or(Path::new(""));
        for (k, v) in &pairs {
            if k == "dataset.path" {
                let p = PathBuf::from(v);
                cfg.dataset_path = if p.is_relative() { base.join(p) } else { p };
            } else {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dataset.path" => self.dataset_path = PathBuf::from(value),
            "dataset.imputation" => self.imputation = value.parse()?,
            "pca.threshold" => {
                let t: f64 = num(key, value)?;
                if !(t > 0.0 && t <= 1.0) {
                    return Err(bad(key, value, "threshold must lie in (0, 1]"));
                }
                self.pca.threshold = t;
            }
            "pca.mode" => self.pca.mode = value.parse()?,
            "pca.scope" => {
                self.pca.scope = match value {
                    "whole-dataset" => PcaScope::WholeDataset,
                    "train-folds" => PcaScope::TrainFolds,
                    _ => return Err(bad(key, value, "expected whole-dataset or train-folds")),
                }
            }
            "smote.k" => {
                self.smote.k = num(key, value)?;
                if self.smote.k == 0 {
                    return Err(bad(key, value, "k must be at least 1"));
                }
            }
            "smote.order" => {
                self.smote.order = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
            }
            "smote.per_class_target" => self.smote.per_class_target = num(key, value)?,
            "smote.seed" => self.smote.seed = num(key, value)?,
            "nb.std_floor" => {
                let f: f64 = num(key, value)?;
                if !(f > 0.0 && f.is_finite()) {
                    return Err(bad(key, value, "std floor must be positive"));
                }
                self.std_floor = f;
            }
            "eval.protocol" => {
                self.eval.protocol = match value {
                    "k-fold" => Protocol::KFold,
                    "leave-one-out" => Protocol::LeaveOneOut,
                    _ => return Err(bad(key, value, "expected k-fold or leave-one-out")),
                }
            }
            "eval.k" => {
                self.eval.k = num(key, value)?;
                if self.eval.k < 2 {
                    return Err(bad(key, value, "fold count must be at least 2"));
                }
            }
            "eval.seeds" => {
                let seeds = parse_seeds(key, value)?;
                if seeds.is_empty() {
                    return Err(bad(key, value, "at least one seed is required"));
                }
                self.eval.seeds = seeds;
            }
            "eval.resample_scope" => {
                self.eval.resample_scope = match value {
                    "whole-dataset" => ResampleScope::WholeDataset,
                    "train-folds-only" => ResampleScope::TrainFoldsOnly,
                    _ => {
                        return Err(bad(
                            key,
                            value,
                            "expected whole-dataset or train-folds-only",
                        ))
                    }
                }
            }
            _ => return Err(Error::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override string. Call [`validate`](Self::validate)
    /// once all overrides are in.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval.seeds.is_empty() {
            return Err(Error::Config("`eval.seeds` must not be empty".into()));
        }
        if self.pca.scope == PcaScope::TrainFolds
            && self.eval.resample_scope == ResampleScope::WholeDataset
            && !self.smote.order.is_empty()
        {
            return Err(Error::Config(
                "`pca.scope = train-folds` requires `eval.resample_scope = train-folds-only`"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Every setting as `(key, value)` in [`KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let value = |key: &str| -> String {
            match key {
                "dataset.path" => self.dataset_path.display().to_string(),
                "dataset.imputation" => self.imputation.as_str().into(),
                "pca.threshold" => self.pca.threshold.to_string(),
                "pca.mode" => self.pca.mode.as_str().into(),
                "pca.scope" => match self.pca.scope {
                    PcaScope::WholeDataset => "whole-dataset".into(),
                    PcaScope::TrainFolds => "train-folds".into(),
                },
                "smote.k" => self.smote.k.to_string(),
                "smote.order" => self.smote.order.join(","),
                "smote.per_class_target" => self.smote.per_class_target.to_string(),
                "smote.seed" => self.smote.seed.to_string(),
                "nb.std_floor" => format!("{:e}", self.std_floor),
                "eval.protocol" => match self.eval.protocol {
                    Protocol::KFold => "k-fold".into(),
                    Protocol::LeaveOneOut => "leave-one-out".into(),
                },
                "eval.k" => self.eval.k.to_string(),
                "eval.seeds" => format_seeds(&self.eval.seeds),
                "eval.resample_scope" => match self.eval.resample_scope {
                    ResampleScope::WholeDataset => "whole-dataset".into(),
                    ResampleScope::TrainFoldsOnly => "train-folds-only".into(),
                },
                _ => unreachable!("key list and match are out of sync"),
            }
        };
        KEYS.iter().map(|k| (k.to_string(), value(k))).collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Maps SMOTE order tokens to class indices: an exact class name, a unique
/// class-name suffix (`A` for `TypeA`), or a numeric index.
pub fn resolve_classes(ds: &Dataset, tokens: &[String]) -> Result<Vec<usize>> {
    tokens
        .iter()
        .map(|t| {
            if let Some(i) = ds.class_index(t) {
                return Ok(i);
            }
            let suffix: Vec<usize> = ds
                .class_names()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.ends_with(t.as_str()))
                .map(|(i, _)| i)
                .collect();
            if suffix.len() == 1 {
                return Ok(suffix[0]);
            }
            match t.parse::<usize>() {
                Ok(i) if i < ds.n_classes() => Ok(i),
                _ => Err(Error::Config(format!(
                    "`smote.order`: `{t}` does not name a class (classes: {})",
                    ds.class_names().join(", ")
                ))),
            }
        })
        .collect()
}
