mod common;

use std::collections::BTreeSet;

use newsstyle::ml::cv::complement;
use newsstyle::ml::tree::Node;
use newsstyle::ml::{
    cross_validate, fit, fit_boosted, fit_forest, fit_logistic, kfold, objective_and_gradient, BoostParams,
    ClassifierModel, Confusion, ForestParams, LearnerSpec, LogisticParams, Matrix, TrainingSet, TreeParams,
};
use newsstyle::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn accuracy(m: &ClassifierModel, x: &Matrix, y: &[u8]) -> f64 {
    let p = m.predict_all(x).unwrap();
    p.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

fn random_data(seed: u64, n: usize, p: usize) -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let y: Vec<u8> = rows.iter().map(|r| u8::from(r[0] * r[0] + r.get(1).copied().unwrap_or(0.0) > 1.0)).collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

fn tree_spec(max_depth: Option<usize>) -> LearnerSpec {
    LearnerSpec::Tree(TreeParams { max_depth, ..Default::default() })
}

#[test]
fn tree_examples() {
    let x = Matrix::from_rows(&[vec![-3.0], vec![-1.0], vec![-0.5], vec![0.0], vec![0.5], vec![2.0]]).unwrap();
    let y = [0, 0, 0, 1, 1, 1];
    let m = fit(&tree_spec(Some(1)), &TrainingSet::new(&x, &y).unwrap(), 0).unwrap();
    assert_eq!(accuracy(&m, &x, &y), 1.0);
    if let newsstyle::ml::Fitted::Tree(t) = &m.model {
        match t.nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (0, -0.25)),
            _ => panic!("expected a split"),
        }
    }
    let same = [1, 1, 1, 1, 1, 1];
    let m = fit(&tree_spec(None), &TrainingSet::new(&x, &same).unwrap(), 0).unwrap();
    assert!(m.feature_importance.iter().all(|&v| v == 0.0));
    if let newsstyle::ml::Fitted::Tree(t) = &m.model {
        assert_eq!(t.leaf_count(), 1);
    }
    assert!(matches!(TrainingSet::new(&Matrix::zeros(0, 2), &[]), Err(Error::EmptyTrainingSet)));
}

#[test]
fn tree_ties_prefer_lowest_feature() {
    // Columns 0 and 1 are identical, so both give the same best split.
    let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
    let y = [0, 0, 1, 1];
    let m = fit(&tree_spec(Some(1)), &TrainingSet::new(&x, &y).unwrap(), 0).unwrap();
    assert_eq!(m.feature_importance, vec![1.0, 0.0]);
}

#[test]
fn tree_root_split_matches_brute_force_stump() {
    for seed in 0..5 {
        let (x, y) = random_data(seed, 80, 3);
        let m = fit(&tree_spec(Some(1)), &TrainingSet::new(&x, &y).unwrap(), 0).unwrap();
        let best = (0..3).map(|j| common::best_stump_accuracy(&x, &y, j)).fold(0.0, f64::max);
        // Gini and accuracy may pick different cuts, but never a worse-than-trivial one.
        let base = y.iter().filter(|&&v| v == 1).count().max(y.iter().filter(|&&v| v == 0).count()) as f64 / 80.0;
        let got = accuracy(&m, &x, &y);
        assert!(got >= base && got <= best + 1e-12, "seed {seed}: {got} vs {best}");
    }
}

#[test]
fn forest_reduces_to_a_tree() {
    let (x, y) = random_data(3, 120, 4);
    let ts = TrainingSet::new(&x, &y).unwrap();
    let forest = LearnerSpec::Forest(ForestParams { n_trees: 1, bootstrap: false, mtry: Some(4), ..Default::default() });
    let f = fit(&forest, &ts, 11).unwrap();
    let t = fit(&tree_spec(None), &ts, 11).unwrap();
    assert_eq!(f.predict_all(&x).unwrap(), t.predict_all(&x).unwrap());
    let (test_x, _) = random_data(4, 50, 4);
    assert_eq!(f.predict_all(&test_x).unwrap(), t.predict_all(&test_x).unwrap());
}

#[test]
fn forest_is_deterministic_and_importances_normalized() {
    let (x, y) = random_data(5, 150, 5);
    let ts = TrainingSet::new(&x, &y).unwrap();
    let p = ForestParams { n_trees: 40, ..Default::default() };
    let (a, ia) = fit_forest(&ts, &p, 9).unwrap();
    let (b, ib) = fit_forest(&ts, &p, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(ia, ib);
    assert!(ia.iter().all(|&v| v >= 0.0));
    assert!((ia.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(fit_forest(&ts, &ForestParams { mtry: Some(6), ..p }, 0).is_err());
    assert!(fit_forest(&ts, &ForestParams { n_trees: 0, ..p }, 0).is_err());
}

#[test]
fn forest_finds_the_informative_feature() {
    let (x, y) = common::one_informative(1);
    let (f, imp) = fit_forest(&TrainingSet::new(&x, &y).unwrap(), &ForestParams { n_trees: 100, ..Default::default() }, 1).unwrap();
    let top = (0..10).max_by(|&a, &b| imp[a].total_cmp(&imp[b])).unwrap();
    assert_eq!(top, 0);
    let oracle: Vec<f64> = (0..10).map(|j| common::best_stump_accuracy(&x, &y, j)).collect();
    let oracle_top = (0..10).max_by(|&a, &b| oracle[a].total_cmp(&oracle[b])).unwrap();
    assert_eq!(oracle_top, 0);
    let correct = (0..x.rows()).filter(|&i| f.predict(x.row(i)) == y[i]).count();
    assert!(correct as f64 / x.rows() as f64 > 0.95);
}

fn separable_2d() -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    while rows.len() < 100 {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let margin = a + 0.6 * b - 0.1;
        if margin.abs() < 0.05 {
            continue;
        }
        rows.push(vec![a, b]);
        y.push(u8::from(margin > 0.0));
    }
    (Matrix::from_rows(&rows).unwrap(), y)
}

#[test]
fn boosted_examples() {
    let (x, y) = separable_2d();
    let ts = TrainingSet::new(&x, &y).unwrap();
    let m = fit(&LearnerSpec::Boosted(BoostParams { n_rounds: 20, ..Default::default() }), &ts, 0).unwrap();
    assert!(accuracy(&m, &x, &y) >= 0.99);

    let (b, _) = fit_boosted(&ts, &BoostParams { learning_rate: 0.0, ..Default::default() }, 0).unwrap();
    let rate = y.iter().filter(|&&v| v == 1).count() as f64 / y.len() as f64;
    for i in 0..x.rows() {
        assert!((b.predict_proba(x.row(i)) - rate).abs() < 1e-12);
    }
    assert!(fit_boosted(&ts, &BoostParams { n_rounds: 0, ..Default::default() }, 0).is_err());
}

#[test]
fn one_round_stump_partitions_like_a_gini_stump() {
    for seed in 0..5 {
        let (x, y) = random_data(seed + 40, 60, 3);
        let ts = TrainingSet::new(&x, &y).unwrap();
        let (b, _) = fit_boosted(&ts, &BoostParams { n_rounds: 1, max_depth: 1, ..Default::default() }, 0).unwrap();
        let t = fit(&tree_spec(Some(1)), &ts, 0).unwrap();
        let (b0, t0) = (b.decision(x.row(0)), t.predict_proba(x.row(0)));
        for i in 1..x.rows() {
            let same_b = (b.decision(x.row(i)) - b0).abs() < 1e-12;
            let same_t = (t.predict_proba(x.row(i)) - t0).abs() < 1e-12;
            assert_eq!(same_b, same_t, "seed {seed} row {i}");
        }
    }
}

#[test]
fn logistic_examples() {
    let x = Matrix::from_rows(&[vec![-2.0], vec![-1.0], vec![-0.5], vec![0.5], vec![1.0], vec![2.0]]).unwrap();
    let y = [0, 0, 0, 1, 1, 1];
    let (m, _) = fit_logistic(&TrainingSet::new(&x, &y).unwrap(), &LogisticParams { l2: 0.1, ..Default::default() });
    assert!(m.weights.iter().all(|w| w.is_finite()) && m.intercept.is_finite());
    let correct = (0..6).filter(|&i| u8::from(m.predict_proba(x.row(i)) > 0.5) == y[i]).count();
    assert_eq!(correct, 6);

    let zeros = Matrix::zeros(8, 3);
    let y = [1, 1, 1, 0, 0, 0, 0, 0];
    let (m, _) = fit_logistic(&TrainingSet::new(&zeros, &y).unwrap(), &LogisticParams::default());
    assert!(m.weights.iter().all(|&w| w == 0.0));
    assert!((m.predict_proba(&[0.0; 3]) - 3.0 / 8.0).abs() < 1e-5);

    let sym = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, -2.0], vec![1.0, 2.0], vec![-1.0, -2.0]]).unwrap();
    let (_, gw, _) = objective_and_gradient(&sym, &[1, 1, 0, 0], &[0.0, 0.0], 0.0, 0.5);
    assert!(gw.iter().all(|g| g.abs() < 1e-15));
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let p = rng.gen_range(1..=10);
        let n = rng.gen_range(5..=50);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let w: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let l2 = rng.gen_range(0.0..1.0);
        let (_, gw, gb) = objective_and_gradient(&x, &y, &w, b, l2);
        let h = 1e-6;
        let f = |w: &[f64], b: f64| objective_and_gradient(&x, &y, w, b, l2).0;
        for j in 0..p {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            let fd = (f(&wp, b) - f(&wm, b)) / (2.0 * h);
            assert!((fd - gw[j]).abs() / fd.abs().max(gw[j].abs()).max(1e-8) < 1e-4);
        }
        let fd = (f(&w, b + h) - f(&w, b - h)) / (2.0 * h);
        assert!((fd - gb).abs() / fd.abs().max(gb.abs()).max(1e-8) < 1e-4);
    }
}

#[test]
fn metric_examples() {
    let m = Confusion { tp: 1, fp: 0, tn: 1, fn_: 0 }.metrics();
    assert_eq!(m.to_array(), [1.0; 4]);
    let m = Confusion { tp: 2, fp: 1, tn: 2, fn_: 1 }.metrics();
    for v in [m.precision, m.recall, m.f1] {
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }
    assert!((m.accuracy - 4.0 / 6.0).abs() < 1e-15);
    let m = Confusion { tp: 0, fp: 0, tn: 3, fn_: 2 }.metrics();
    assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    let c = Confusion::from_predictions(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]).unwrap();
    assert_eq!((c.tp, c.fp, c.tn, c.fn_), (2, 1, 1, 1));
    assert!(Confusion::from_predictions(&[1], &[1, 0]).is_err());
}

#[test]
fn kfold_examples() {
    let y = vec![0u8; 10];
    let f = kfold(&y, 5, false, 3).unwrap();
    assert_eq!(f.len(), 5);
    assert!(f.iter().all(|v| v.len() == 2));
    assert_eq!(f, kfold(&y, 5, false, 3).unwrap());
    let y: Vec<u8> = (0..240).map(|i| u8::from(i % 2 == 0)).collect();
    for fold in kfold(&y, 5, true, 8).unwrap() {
        let fake = fold.iter().filter(|&&i| y[i] == 1).count();
        assert_eq!((fake, fold.len() - fake), (24, 24));
    }
    assert!(kfold(&y, 1, true, 0).is_err());
    assert!(kfold(&[0, 0, 0, 1], 2, true, 0).is_err());
}

#[test]
fn cross_validate_aggregates_folds() {
    let (x, y) = random_data(9, 100, 3);
    let r = cross_validate(&x, &y, 5, true, &tree_spec(Some(3)), 2).unwrap();
    assert_eq!(r.folds.len(), 5);
    assert_eq!(r.total.total(), 100);
    let mean_f1 = r.fold_metrics.iter().map(|m| m.f1).sum::<f64>() / 5.0;
    assert!((r.mean.f1 - mean_f1).abs() < 1e-15);
    for m in &r.fold_metrics {
        assert!(m.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn model_files_round_trip_and_check_version() {
    let (x, y) = random_data(2, 40, 2);
    let m = fit(&LearnerSpec::by_name("forest").unwrap(), &TrainingSet::new(&x, &y).unwrap(), 4)
        .unwrap()
        .with_schema(vec!["a".into(), "b".into()], "hash".into());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    m.save(&p).unwrap();
    let back = ClassifierModel::load(&p).unwrap();
    assert_eq!(back, m);
    let text = std::fs::read_to_string(&p).unwrap().replacen("\"format_version\":1", "\"format_version\":99", 1);
    std::fs::write(&p, text).unwrap();
    assert!(matches!(ClassifierModel::load(&p), Err(Error::SchemaMismatch(_))));
    assert!(matches!(m.predict_all(&Matrix::zeros(1, 3)), Err(Error::SchemaMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_partition_and_stratify(n in 10usize..200, k in prop::sample::select(vec![2usize, 5, 10]), seed in any::<u64>(), bias in 0.2f64..0.8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen::<f64>() < bias)).collect();
        let pos = y.iter().filter(|&&v| v == 1).count();
        prop_assume!(pos >= k && n - pos >= k);
        for strat in [false, true] {
            let folds = kfold(&y, k, strat, seed).unwrap();
            let all: Vec<usize> = folds.iter().flatten().copied().collect();
            prop_assert_eq!(all.len(), n);
            prop_assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), n);
            prop_assert!(folds.iter().all(|f| !f.is_empty()));
            for (i, f) in folds.iter().enumerate() {
                prop_assert_eq!(complement(&folds, i).len() + f.len(), n);
                if strat {
                    let fp = f.iter().filter(|&&j| y[j] == 1).count() as f64;
                    let expect = pos as f64 * f.len() as f64 / n as f64;
                    prop_assert!((fp - expect).abs() <= 1.0 + 1e-9, "fold {} has {} fake, expected {}", i, fp, expect);
                }
            }
        }
    }

    #[test]
    fn monotone_transforms_leave_training_predictions_unchanged(seed in 0u64..1000) {
        let (x, y) = random_data(seed, 60, 3);
        let rows: Vec<Vec<f64>> = (0..x.rows())
            .map(|i| {
                let r = x.row(i);
                vec![r[0].exp(), 3.0 * r[1] - 7.0, r[2].powi(3)]
            })
            .collect();
        let xt = Matrix::from_rows(&rows).unwrap();
        // Without bootstrap every row is in every tree's sample; out-of-bag rows
        // fall between midpoint thresholds, which nonlinear maps move.
        let forest = LearnerSpec::Forest(ForestParams { n_trees: 15, bootstrap: false, ..Default::default() });
        for spec in [tree_spec(None), forest] {
            let a = fit(&spec, &TrainingSet::new(&x, &y).unwrap(), seed).unwrap();
            let b = fit(&spec, &TrainingSet::new(&xt, &y).unwrap(), seed).unwrap();
            prop_assert_eq!(a.predict_all(&x).unwrap(), b.predict_all(&xt).unwrap());
        }
    }
}
