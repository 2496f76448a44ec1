use pcasmote::linalg::{covariance_matrix, DenseMatrix};
use pcasmote::pca::{fit_pca_matrix, project};
use pcasmote::{PcaMode, Rng};
use proptest::prelude::*;

fn data_matrix() -> impl Strategy<Value = DenseMatrix> {
    (3usize..=14, 1usize..=6).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5.0..5.0f64, r * c)
            .prop_map(move |v| DenseMatrix::from_vec(r, c, v).unwrap())
    })
}

fn mode() -> impl Strategy<Value = PcaMode> {
    prop_oneof![Just(PcaMode::Covariance), Just(PcaMode::Correlation)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projected_training_data_is_decorrelated(x in data_matrix(), m in mode(), t in 0.3..=1.0f64) {
        let model = fit_pca_matrix(&x, t, m).unwrap();
        let c = covariance_matrix(&project(&model, &x).unwrap()).unwrap();
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                if i != j {
                    prop_assert!(c[(i, j)].abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn full_threshold_conserves_variance(x in data_matrix()) {
        let model = fit_pca_matrix(&x, 1.0, PcaMode::Covariance).unwrap();
        let z = covariance_matrix(&project(&model, &x).unwrap()).unwrap();
        let input = covariance_matrix(&x).unwrap();
        prop_assert!((z.trace() - input.trace()).abs() < 1e-8);
        for k in 0..model.retained {
            prop_assert!((z[(k, k)] - model.eigenvalues[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn components_are_orthonormal(x in data_matrix(), m in mode()) {
        let model = fit_pca_matrix(&x, 1.0, m).unwrap();
        let g = model.components.transpose().matmul(&model.components).unwrap();
        prop_assert!(g.max_abs_diff(&DenseMatrix::identity(model.retained)) < 1e-8);
    }

    #[test]
    fn transform_is_affine(x in data_matrix(), m in mode(), a in -2.0..2.0f64, i in 0usize..100, j in 0usize..100) {
        let model = fit_pca_matrix(&x, 0.95, m).unwrap();
        let (xi, xj) = (x.row(i % x.rows()), x.row(j % x.rows()));
        let mix: Vec<f64> = xi.iter().zip(xj).map(|(p, q)| a * p + (1.0 - a) * q).collect();
        let rows = DenseMatrix::from_rows(&[xi.to_vec(), xj.to_vec(), mix]).unwrap();
        let z = project(&model, &rows).unwrap();
        for k in 0..model.retained {
            let expected = a * z[(0, k)] + (1.0 - a) * z[(1, k)];
            prop_assert!((z[(2, k)] - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn plane_in_five_dimensions_keeps_two_components() {
    // rows are s * u + t * w for a hand-picked orthonormal pair u, w
    let u = [0.5, 0.5, 0.5, 0.5, 0.0];
    let w = [0.5, -0.5, 0.5, -0.5, 0.0];
    let mut rng = Rng::new(3);
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let s = rng.next_f64() * 10.0 - 5.0;
            let t = rng.next_f64() * 4.0 - 2.0;
            (0..5).map(|k| s * u[k] + t * w[k]).collect()
        })
        .collect();
    let x = DenseMatrix::from_rows(&rows).unwrap();
    let model = fit_pca_matrix(&x, 0.99, PcaMode::Covariance).unwrap();
    assert_eq!(model.retained, 2);
    for &l in &model.eigenvalues[2..] {
        assert!(l.abs() < 1e-10);
    }
}

#[test]
fn four_by_three_matches_brute_force_projection() {
    let x = DenseMatrix::from_rows(&[
        [2.0, 0.5, 1.0],
        [0.0, 1.5, -1.0],
        [3.0, 2.0, 0.0],
        [1.0, -1.0, 4.0],
    ])
    .unwrap();
    for mode in [PcaMode::Covariance, PcaMode::Correlation] {
        let model = fit_pca_matrix(&x, 1.0, mode).unwrap();
        let z = project(&model, &x).unwrap();
        for i in 0..4 {
            for k in 0..model.retained {
                let mut acc = 0.0;
                for f in 0..3 {
                    let col: Vec<f64> = (0..4).map(|r| x[(r, f)]).collect();
                    let mean = col.iter().sum::<f64>() / 4.0;
                    let scale = match mode {
                        PcaMode::Covariance => 1.0,
                        PcaMode::Correlation => {
                            (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 3.0).sqrt()
                        }
                    };
                    acc += (x[(i, f)] - mean) / scale * model.components[(f, k)];
                }
                assert!((z[(i, k)] - acc).abs() < 1e-10);
            }
        }
    }
}
