mod common;

use proptest::prelude::*;
use solarcast::forest::{read_forest, write_forest, ForestHyperParams, ForestModel, MaxFeatures};
use solarcast::preprocess::FeatureMatrix;

fn single_tree(max_depth: Option<usize>) -> ForestHyperParams {
    ForestHyperParams {
        n_trees: 1,
        max_depth,
        bootstrap: false,
        max_features: MaxFeatures::All,
        ..ForestHyperParams::default()
    }
}

fn matrix(cols: &[Vec<f64>]) -> FeatureMatrix {
    let n = cols[0].len();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let names = (0..cols.len()).map(|j| format!("x{j}")).collect();
    FeatureMatrix::from_rows(names, &rows).unwrap()
}

fn sse(values: &[f64]) -> f64 {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m).powi(2)).sum()
}

/// Minimal SSE of any tree of depth ≤ `depth` over rows sorted by x, where
/// equal x values can never be separated.
fn exhaustive_sse(groups: &[Vec<f64>], depth: usize) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let mut best = sse(&all);
    if depth == 0 {
        return best;
    }
    for cut in 1..groups.len() {
        let s = exhaustive_sse(&groups[..cut], depth - 1) + exhaustive_sse(&groups[cut..], depth - 1);
        if s < best {
            best = s;
        }
    }
    best
}

fn group_by_x(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut last = f64::NAN;
    for i in idx {
        if groups.is_empty() || x[i] != last {
            groups.push(Vec::new());
            last = x[i];
        }
        groups.last_mut().unwrap().push(y[i]);
    }
    groups
}

fn train_sse(model: &ForestModel, x: &FeatureMatrix, y: &[f64]) -> f64 {
    model.predict(x).unwrap().iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum()
}

fn small_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec((0i32..8).prop_map(f64::from), n),
            prop::collection::vec((-50i32..50).prop_map(|v| f64::from(v) / 4.0), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unlimited_tree_reaches_exhaustive_optimum((x, y) in small_data()) {
        let m = matrix(std::slice::from_ref(&x));
        let model = ForestModel::fit(&m, &y, "y", &single_tree(None)).unwrap();
        let depth = model.trees[0].depth();
        let want = exhaustive_sse(&group_by_x(&x, &y), depth);
        let got = train_sse(&model, &m, &y);
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want), "{} vs {}", got, want);
    }

    #[test]
    fn stump_matches_exhaustive_best_split((x, y) in small_data()) {
        let m = matrix(std::slice::from_ref(&x));
        let model = ForestModel::fit(&m, &y, "y", &single_tree(Some(1))).unwrap();
        let want = exhaustive_sse(&group_by_x(&x, &y), 1);
        let got = train_sse(&model, &m, &y);
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want), "{} vs {}", got, want);
    }

    #[test]
    fn monotone_rescaling_keeps_row_routing(
        rows in prop::collection::vec((0.0..100.0f64, 0.0..10.0f64, -20.0..20.0f64), 5..60),
        seed in any::<u64>(),
    ) {
        let x0: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let x1: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let params = ForestHyperParams { n_trees: 3, bootstrap: false, max_features: MaxFeatures::Sqrt, seed, ..ForestHyperParams::default() };
        let a = matrix(&[x0.clone(), x1.clone()]);
        let warped: Vec<f64> = x0.iter().map(|v| (v / 10.0).exp() + v.powi(3)).collect();
        let b = matrix(&[warped, x1]);
        let ma = ForestModel::fit(&a, &y, "y", &params).unwrap();
        let mb = ForestModel::fit(&b, &y, "y", &params).unwrap();
        for i in 0..y.len() {
            for (ta, tb) in ma.trees.iter().zip(&mb.trees) {
                prop_assert_eq!(ta.leaf_index(a.row(i)), tb.leaf_index(b.row(i)));
            }
            prop_assert_eq!(ma.predict_row(a.row(i)), mb.predict_row(b.row(i)));
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical(
        rows in prop::collection::vec(prop::array::uniform3(-5.0..5.0f64), 10..80),
        seed in any::<u64>(),
    ) {
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] - r[2]).collect();
        let m = FeatureMatrix::from_rows(vec!["a".into(), "b".into(), "c".into()], &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let params = ForestHyperParams { n_trees: 4, max_features: MaxFeatures::Sqrt, seed, ..ForestHyperParams::default() };
        let a = ForestModel::fit(&m, &y, "y", &params).unwrap();
        let b = ForestModel::fit(&m, &y, "y", &params).unwrap();
        prop_assert_eq!(&a, &b);
        let mut buf = Vec::new();
        write_forest(&a, &mut buf).unwrap();
        let back = read_forest(&buf[..]).unwrap();
        prop_assert_eq!(&back, &a);
        for i in 0..m.n_rows() {
            let per_tree = a.tree_predictions(m.row(i));
            let mean = per_tree.iter().sum::<f64>() / per_tree.len() as f64;
            prop_assert_eq!(a.predict_row(m.row(i)).to_bits(), mean.to_bits());
        }
    }
}

#[test]
fn distinct_rows_are_memorised() {
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![f64::from(i % 7), f64::from(i / 7)]).collect();
    let y: Vec<f64> = (0..50).map(|i| f64::from(i * i % 13)).collect();
    let m = FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &rows).unwrap();
    let model = ForestModel::fit(&m, &y, "y", &single_tree(None)).unwrap();
    assert_eq!(model.predict(&m).unwrap(), y);
}
