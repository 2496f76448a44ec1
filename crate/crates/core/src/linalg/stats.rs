use super::DenseMatrix;
use crate::error::{Error, Result};

/// Standard deviations below this are treated as 1 when standardizing.
pub const SD_FLOOR: f64 = 1e-12;

pub fn mean_vector(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 {
        return Err(Error::arg("mean of an empty matrix"));
    }
    let mut sums = vec![0.0; m.cols()];
    for row in m.row_iter() {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    let n = m.rows() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Sample standard deviation per column (divisor n-1).
pub fn std_vector(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() < 2 {
        return Err(Error::arg("standard deviation needs at least 2 rows"));
    }
    let mean = mean_vector(m)?;
    let mut ss = vec![0.0; m.cols()];
    for row in m.row_iter() {
        for ((s, v), mu) in ss.iter_mut().zip(row).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    let denom = (m.rows() - 1) as f64;
    Ok(ss.into_iter().map(|s| (s / denom).sqrt()).collect())
}

/// Sample covariance (divisor n-1), exactly symmetric.
pub fn covariance_matrix(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() < 2 {
        return Err(Error::arg(format!(
            "covariance needs at least 2 rows, got {}",
            m.rows()
        )));
    }
    let mean = mean_vector(m)?;
    let p = m.cols();
    let mut centered = m.clone();
    for i in 0..m.rows() {
        for (v, mu) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= mu;
        }
    }
    Ok(gram_upper(&centered, (m.rows() - 1) as f64, p))
}

/// Pearson correlation. Columns with sd < [`SD_FLOOR`] standardize to zero,
/// so their whole row and column (diagonal included) is 0.
pub fn correlation_matrix(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (z, sd) = standardize(m)?;
    let mut r = gram_upper(&z, (m.rows() - 1) as f64, m.cols());
    for i in 0..m.cols() {
        for j in 0..m.cols() {
            let v = &mut r[(i, j)];
            if i == j {
                *v = if sd[i] < SD_FLOOR { 0.0 } else { 1.0 };
            } else {
                *v = v.clamp(-1.0, 1.0);
            }
        }
    }
    Ok(r)
}

/// Z-scores each column; returns the standardized matrix and the raw
/// column standard deviations.
pub(crate) fn standardize(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let mean = mean_vector(m)?;
    let sd = std_vector(m)?;
    let mut z = m.clone();
    for i in 0..m.rows() {
        for ((v, mu), s) in z.row_mut(i).iter_mut().zip(&mean).zip(&sd) {
            *v = (*v - mu) / floored(*s);
        }
    }
    Ok((z, sd))
}

pub(crate) fn floored(sd: f64) -> f64 {
    if sd < SD_FLOOR {
        1.0
    } else {
        sd
    }
}

fn gram_upper(centered: &DenseMatrix, divisor: f64, p: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(p, p);
    for row in centered.row_iter() {
        for a in 0..p {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in a..p {
                out[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = out[(a, b)] / divisor;
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}
