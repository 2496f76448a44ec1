use pcasmote::linalg::DenseMatrix;
use pcasmote::smote::{nearest_minority_neighbors, oversample_class_traced, synthesize};
use pcasmote::{balance_sequence, oversample_class, Dataset, Rng, SmoteConfig};
use proptest::prelude::*;

fn points(max_rows: usize, dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (2..=max_rows).prop_flat_map(move |r| {
        // coarse grid values so distance ties actually occur
        prop::collection::vec((-4i32..=4).prop_map(|v| v as f64 * 0.5), r * dim)
            .prop_map(move |v| DenseMatrix::from_vec(r, dim, v).unwrap())
    })
}

/// Sorts every other row by (squared distance, index) and keeps k.
fn knn_oracle(x: &DenseMatrix, idx: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = Vec::new();
    for j in 0..x.rows() {
        if j != idx {
            let d: f64 = (0..x.cols())
                .map(|c| (x[(idx, c)] - x[(j, c)]).powi(2))
                .sum();
            all.push((d, j));
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.truncate(k);
    all.into_iter().map(|(_, j)| j).collect()
}

/// Two classes, each with at least 2 samples; class 0 comes first.
fn two_class(max_minority: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_minority, 2usize..=6, 1usize..=4).prop_flat_map(|(m, extra, dim)| {
        let n = m + extra;
        prop::collection::vec(-10.0..10.0f64, n * dim).prop_map(move |v| {
            let labels = (0..n).map(|i| usize::from(i >= m)).collect();
            Dataset::new(
                DenseMatrix::from_vec(n, dim, v).unwrap(),
                labels,
                vec!["min".into(), "maj".into()],
                (0..dim).map(|d| format!("f{d}")).collect(),
                "prop",
            )
            .unwrap()
        })
    })
}

/// Searches every pair of original class members for one whose segment
/// holds `row`, solving the gap coordinate by coordinate.
fn on_some_segment(row: &[f64], members: &[&[f64]]) -> bool {
    members.iter().any(|s| {
        members.iter().any(|n| {
            let mut gap: Option<f64> = None;
            for ((&r, &a), &b) in row.iter().zip(*s).zip(*n) {
                let d = b - a;
                if d.abs() < 1e-12 {
                    if (r - a).abs() > 1e-9 {
                        return false;
                    }
                    continue;
                }
                let u = (r - a) / d;
                if !(-1e-9..=1.0 + 1e-9).contains(&u) {
                    return false;
                }
                match gap {
                    Some(g) if (g - u).abs() > 1e-9 => return false,
                    _ => gap = Some(u),
                }
            }
            true
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn neighbors_match_exhaustive_sort(x in points(12, 3), k in 1usize..8, i in 0usize..100) {
        let idx = i % x.rows();
        let got = nearest_minority_neighbors(&x, idx, k).unwrap();
        prop_assert_eq!(got, knn_oracle(&x, idx, k.min(x.rows() - 1)));
    }

    #[test]
    fn synthetic_point_stays_in_the_box(
        s in prop::collection::vec(-5.0..5.0f64, 4),
        n in prop::collection::vec(-5.0..5.0f64, 4),
        seed in any::<u64>(),
    ) {
        let p = synthesize(&s, &n, &mut Rng::new(seed)).unwrap();
        for i in 0..4 {
            prop_assert!(p[i] >= s[i].min(n[i]) && p[i] <= s[i].max(n[i]));
        }
    }

    #[test]
    fn oversampling_contract(ds in two_class(8), add in 0usize..15, k in 1usize..7, seed in any::<u64>()) {
        let current = ds.class_counts()[0];
        let cfg = SmoteConfig { k, target_class: 0, target_count: current + add, seed };
        let run = oversample_class_traced(&ds, &cfg).unwrap();
        let out = &run.dataset;

        // exact counts, other class untouched
        prop_assert_eq!(out.class_counts(), vec![current + add, ds.class_counts()[1]]);
        prop_assert_eq!(out.n_samples(), ds.n_samples() + add);

        // originals preserved in order, synthetic rows appended with the class label
        let original: Vec<usize> = (0..ds.n_samples()).collect();
        prop_assert_eq!(&out.features().select_rows(&original), ds.features());
        prop_assert_eq!(&out.labels()[..ds.n_samples()], ds.labels());
        prop_assert!(out.labels()[ds.n_samples()..].iter().all(|&l| l == 0));

        // convexity against the original minority rows
        let members: Vec<&[f64]> = ds.class_indices(0).into_iter().map(|i| ds.features().row(i)).collect();
        for (r, origin) in (ds.n_samples()..out.n_samples()).zip(&run.origins) {
            let row = out.features().row(r);
            prop_assert!(on_some_segment(row, &members));
            let (s, n) = (ds.features().row(origin.sample), ds.features().row(origin.neighbor));
            for ((&v, &a), &b) in row.iter().zip(s).zip(n) {
                prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
                prop_assert!((v - (a + origin.gap * (b - a))).abs() < 1e-9);
            }
        }

        // deterministic
        prop_assert_eq!(&oversample_class(&ds, &cfg).unwrap(), out);
    }

    #[test]
    fn sequence_hits_every_target(ds in two_class(6), seed in any::<u64>()) {
        let target = ds.class_counts().into_iter().max().unwrap() + 3;
        let runs = balance_sequence(&ds, &[1, 0], target, 5, seed).unwrap();
        prop_assert_eq!(runs[1].class_counts(), vec![target, target]);
        prop_assert_eq!(runs, balance_sequence(&ds, &[1, 0], target, 5, seed).unwrap());
    }
}

#[test]
fn nine_points_in_eighteen_dimensions() {
    let mut rng = Rng::new(18);
    for _ in 0..10 {
        let v = (0..9 * 18).map(|_| rng.next_f64()).collect();
        let x = DenseMatrix::from_vec(9, 18, v).unwrap();
        for idx in 0..9 {
            assert_eq!(
                nearest_minority_neighbors(&x, idx, 5).unwrap(),
                knn_oracle(&x, idx, 5)
            );
        }
    }
}

#[test]
fn different_seeds_give_different_rows() {
    let x = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [9.0, 9.0]]).unwrap();
    let ds = Dataset::new(
        x,
        vec![0, 0, 0, 1],
        vec!["a".into(), "b".into()],
        vec!["x".into(), "y".into()],
        "t",
    )
    .unwrap();
    let cfg = |seed| SmoteConfig {
        k: 2,
        target_class: 0,
        target_count: 6,
        seed,
    };
    assert_ne!(
        oversample_class(&ds, &cfg(1)).unwrap(),
        oversample_class(&ds, &cfg(2)).unwrap()
    );
}
