//! Small dense linear algebra: column statistics and a symmetric eigensolver.

mod eigen;
mod matrix;
mod stats;

pub use eigen::{
    jacobi_eigen, EigenDecomposition, MAX_SWEEPS, RELATIVE_OFF_DIAGONAL_TOLERANCE,
    SYMMETRY_TOLERANCE,
};
pub use matrix::DenseMatrix;
pub(crate) use stats::floored;
pub use stats::{correlation_matrix, covariance_matrix, mean_vector, std_vector, SD_FLOOR};
