use pcasmote::linalg::{correlation_matrix, covariance_matrix, jacobi_eigen, DenseMatrix};
use pcasmote::Rng;
use proptest::prelude::*;

fn symmetric(n: usize, raw: &[f64]) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (raw[i * n + j] + raw[j * n + i]);
        }
    }
    a
}

fn symmetric_matrix(max_n: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-10.0..10.0f64, n * n).prop_map(move |raw| symmetric(n, &raw))
    })
}

fn data_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (2..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0..5.0f64, r * c)
            .prop_map(move |v| DenseMatrix::from_vec(r, c, v).unwrap())
    })
}

fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> DenseMatrix {
    let v = (0..rows * cols)
        .map(|_| rng.next_f64() * 8.0 - 4.0)
        .collect();
    DenseMatrix::from_vec(rows, cols, v).unwrap()
}

/// Sample covariance from all ordered row pairs:
/// `cov_ij = sum_k sum_l (x_ki - x_li)(x_kj - x_lj) / (2 n (n - 1))`.
fn pairwise_covariance(x: &DenseMatrix) -> DenseMatrix {
    let (n, p) = x.shape();
    let mut c = DenseMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += (x[(k, i)] - x[(l, i)]) * (x[(k, j)] - x[(l, j)]);
                }
            }
            c[(i, j)] = s / (2.0 * n as f64 * (n as f64 - 1.0));
        }
    }
    c
}

fn zscore_correlation(x: &DenseMatrix) -> DenseMatrix {
    let (n, p) = x.shape();
    let mut z = x.clone();
    for j in 0..p {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        for i in 0..n {
            z[(i, j)] = (x[(i, j)] - mean) / sd;
        }
    }
    let mut c = DenseMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            c[(a, b)] = (0..n).map(|i| z[(i, a)] * z[(i, b)]).sum::<f64>() / (n as f64 - 1.0);
        }
    }
    c
}

#[test]
fn covariance_matches_pairwise_oracle() {
    let mut rng = Rng::new(11);
    for _ in 0..20 {
        let x = random_matrix(&mut rng, 5, 3);
        let c = covariance_matrix(&x).unwrap();
        assert!(c.max_abs_diff(&pairwise_covariance(&x)) < 1e-12);
    }
}

#[test]
fn correlation_matches_zscore_oracle() {
    let mut rng = Rng::new(12);
    for _ in 0..20 {
        let x = random_matrix(&mut rng, 6, 4);
        let c = correlation_matrix(&x).unwrap();
        assert!(c.max_abs_diff(&zscore_correlation(&x)) < 1e-10);
    }
}

#[test]
fn orthogonal_columns_have_zero_correlation() {
    // centered and mutually orthogonal by construction
    let x = DenseMatrix::from_rows(&[
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ])
    .unwrap();
    let c = correlation_matrix(&x).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((c[(i, j)] - expected).abs() < 1e-12);
        }
    }
}

fn check_decomposition(a: &DenseMatrix) -> Result<(), TestCaseError> {
    let n = a.rows();
    let eig = jacobi_eigen(a).unwrap();
    let v = &eig.eigenvectors;
    let l = &eig.eigenvalues;

    let gram = v.transpose().matmul(v).unwrap();
    prop_assert!(gram.max_abs_diff(&DenseMatrix::identity(n)) < 1e-8);

    for (k, &lambda) in l.iter().enumerate() {
        let col = v.column(k);
        for i in 0..n {
            let av: f64 = (0..n).map(|j| a[(i, j)] * col[j]).sum();
            prop_assert!((av - lambda * col[i]).abs() < 1e-8 * lambda.abs().max(1.0));
        }
        // sign: largest-magnitude entry (first on ties) is nonnegative
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        prop_assert!(col[best] >= 0.0);
    }
    prop_assert!(l.windows(2).all(|w| w[0] >= w[1]));

    let trace_scale = (0..n).map(|i| a[(i, i)].abs()).sum::<f64>().max(1.0);
    prop_assert!((l.iter().sum::<f64>() - a.trace()).abs() < 1e-9 * trace_scale);

    let mut vl = v.clone();
    for i in 0..n {
        for (x, lambda) in vl.row_mut(i).iter_mut().zip(l) {
            *x *= lambda;
        }
    }
    let rebuilt = vl.matmul(&v.transpose()).unwrap();
    prop_assert!(rebuilt.max_abs_diff(a) < 1e-8);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobi_invariants(a in symmetric_matrix(32)) {
        check_decomposition(&a)?;
    }

    #[test]
    fn covariance_is_symmetric_with_nonnegative_diagonal(x in data_matrix(12, 6)) {
        let c = covariance_matrix(&x).unwrap();
        prop_assert!(c.asymmetry() <= 1e-12);
        for i in 0..c.rows() {
            prop_assert!(c[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn correlation_entries_are_bounded(x in data_matrix(12, 6)) {
        let c = correlation_matrix(&x).unwrap();
        for v in c.as_slice() {
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn covariance_and_correlation_spectra_are_nonnegative(x in data_matrix(10, 8)) {
        for m in [covariance_matrix(&x).unwrap(), correlation_matrix(&x).unwrap()] {
            for &l in &jacobi_eigen(&m).unwrap().eigenvalues {
                prop_assert!(l >= -1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn jacobi_reconstructs_64_by_64(raw in prop::collection::vec(-10.0..10.0f64, 64 * 64)) {
        check_decomposition(&symmetric(64, &raw))?;
    }
}

#[test]
fn trace_and_determinant_small_cases() {
    let a = DenseMatrix::from_rows(&[[4.0, 1.0], [1.0, 3.0]]).unwrap();
    let e = jacobi_eigen(&a).unwrap();
    assert!((e.eigenvalues[0] * e.eigenvalues[1] - 11.0).abs() < 1e-12);

    let mut rng = Rng::new(8);
    let raw: Vec<f64> = (0..64).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    let a = symmetric(8, &raw);
    let e = jacobi_eigen(&a).unwrap();
    assert!((e.eigenvalues.iter().sum::<f64>() - a.trace()).abs() < 1e-9);
}
