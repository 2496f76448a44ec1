//! Versioned plain-text container for fitted models.
//!
//! ```text
//! pcasmote-model v1
//! kind = pca
//! key = value
//! [vector-name] 3
//! 0.5 1 -2
//! [matrix-name] 2 3
//! 1 0 0
//! 0 1 0
//! ```
//!
//! Scalars come first, then blocks. Numbers use the shortest decimal form
//! that parses back to the same `f64`, so a reload is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const HEADER: &str = "pcasmote-model v1";

#[derive(Debug, Default)]
pub struct ModelWriter {
    scalars: Vec<(String, String)>,
    blocks: String,
}

impl ModelWriter {
    pub fn new(kind: &str) -> Self {
        let mut w = ModelWriter::default();
        w.scalar("kind", kind);
        w
    }

    pub fn scalar(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.scalars.push((key.to_string(), value.to_string()));
        self
    }

    pub fn vector(&mut self, name: &str, values: &[f64]) -> &mut Self {
        let _ = writeln!(self.blocks, "[{name}] {}", values.len());
        self.blocks.push_str(&join(values));
        self.blocks.push('\n');
        self
    }

    pub fn matrix(&mut self, name: &str, m: &DenseMatrix) -> &mut Self {
        let _ = writeln!(self.blocks, "[{name}] {} {}", m.rows(), m.cols());
        for r in m.row_iter() {
            self.blocks.push_str(&join(r));
            self.blocks.push('\n');
        }
        self
    }

    pub fn finish(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "{k} = {v}");
        }
        out.push_str(&self.blocks);
        out
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug)]
pub struct ModelReader {
    scalars: BTreeMap<String, String>,
    vectors: BTreeMap<String, Vec<f64>>,
    matrices: BTreeMap<String, DenseMatrix>,
}

impl ModelReader {
    pub fn parse(text: &str, expected_kind: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            Some((_, h)) => return Err(Error::Model(format!("unsupported header `{h}`"))),
            None => return Err(Error::Model("empty model file".into())),
        }
        let mut reader = ModelReader {
            scalars: BTreeMap::new(),
            vectors: BTreeMap::new(),
            matrices: BTreeMap::new(),
        };
        while let Some((i, line)) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let (name, dims) = rest
                    .split_once(']')
                    .ok_or_else(|| Error::Model(format!("line {}: bad block header", i + 1)))?;
                let dims: Vec<usize> = dims
                    .split_whitespace()
                    .map(|d| d.parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Model(format!("line {}: bad block size", i + 1)))?;
                let (rows, cols, is_vector) = match dims[..] {
                    [n] => (1, n, true),
                    [r, c] => (r, c, false),
                    _ => return Err(Error::Model(format!("line {}: bad block size", i + 1))),
                };
                let mut data = Vec::with_capacity(rows * cols);
                for _ in 0..rows {
                    let (j, row) = lines
                        .next()
                        .ok_or_else(|| Error::Model(format!("block `{name}` is truncated")))?;
                    let values = parse_row(row, j + 1)?;
                    if values.len() != cols {
                        return Err(Error::Model(format!(
                            "line {}: block `{name}` row has {} values, expected {cols}",
                            j + 1,
                            values.len()
                        )));
                    }
                    data.extend(values);
                }
                if is_vector {
                    reader.vectors.insert(name.to_string(), data);
                } else {
                    let m = DenseMatrix::from_vec(rows, cols, data)
                        .map_err(|e| Error::Model(format!("block `{name}`: {e}")))?;
                    reader.matrices.insert(name.to_string(), m);
                }
            } else {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Model(format!("line {}: expected key = value", i + 1)))?;
                reader
                    .scalars
                    .insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let kind = reader.scalar("kind")?;
        if kind != expected_kind {
            return Err(Error::Model(format!(
                "expected a `{expected_kind}` model, found `{kind}`"
            )));
        }
        Ok(reader)
    }

    pub fn scalar(&self, key: &str) -> Result<&str> {
        self.scalars
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Model(format!("missing key `{key}`")))
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.scalar(key)?;
        raw.parse()
            .map_err(|_| Error::Model(format!("key `{key}` has invalid value `{raw}`")))
    }

    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        self.vectors
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Model(format!("missing block `{name}`")))
    }

    pub fn matrix(&self, name: &str) -> Result<&DenseMatrix> {
        self.matrices
            .get(name)
            .ok_or_else(|| Error::Model(format!("missing block `{name}`")))
    }
}

fn parse_row(row: &str, line: usize) -> Result<Vec<f64>> {
    row.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Model(format!("line {line}: invalid number `{t}`")))
        })
        .collect()
}
