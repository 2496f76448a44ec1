use super::DenseMatrix;
use crate::error::{Error, Result};

/// Input asymmetry tolerated by [`jacobi_eigen`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Convergence when the off-diagonal Frobenius norm drops below this
/// fraction of the input's Frobenius norm.
pub const RELATIVE_OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix.
///
/// Eigenvalues are sorted descending and column `j` of `eigenvectors` pairs
/// with `eigenvalues[j]`. In each column the entry of largest magnitude is
/// nonnegative (first such entry on ties), which fixes the sign.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Sweeps visit pairs `(p, q)` with `p < q` in row-major order. The result
/// is a deterministic function of the input bits.
pub fn jacobi_eigen(a: &DenseMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::arg(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::arg(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let n = a.rows();
    // Work on the exactly symmetrized copy.
    let mut w = a.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let threshold = RELATIVE_OFF_DIAGONAL_TOLERANCE * w.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off_norm = off_diagonal_norm(&w);
        if off_norm > threshold {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_norm,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the lower index first among equal eigenvalues
    order.sort_by(|&i, &j| w[(j, j)].total_cmp(&w[(i, i)]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| w[(i, i)]).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        for r in 1..n {
            if v[(r, src)].abs() > v[(pivot, src)].abs() {
                pivot = r;
            }
        }
        let sign = if n > 0 && v[(pivot, src)] < 0.0 {
            -1.0
        } else {
            1.0
        };
        for r in 0..n {
            eigenvectors[(r, col)] = sign * v[(r, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(w: &DenseMatrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * w[(i, j)] * w[(i, j)];
        }
    }
    s.sqrt()
}

/// One plane rotation annihilating `w[p][q]`, accumulated into `v`.
fn rotate(w: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = w.rows();
    let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    w[(p, p)] -= t * apq;
    w[(q, q)] += t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = w[(r, p)];
        let arq = w[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        w[(r, p)] = new_rp;
        w[(p, r)] = new_rp;
        w[(r, q)] = new_rq;
        w[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}
