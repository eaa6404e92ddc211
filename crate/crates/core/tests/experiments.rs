mod common;

use std::collections::BTreeSet;

use newsstyle::experiments::eval::partitions;
use newsstyle::experiments::{
    prepare, run, run_prepared, EarlyMode, EvalMethod, ExperimentConfig, ExperimentKind, MetricRow, Prepared,
    CBA_ROWS, DIA_ROWS, TABLE3_ROWS,
};
use newsstyle::features::extract::analyze_corpus;
use newsstyle::features::{AnalyzedArticle, ContentView};
use newsstyle::Error;

fn config(n_trees: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&common::synthetic_dir().join("experiment.toml")).unwrap();
    cfg.learners.forest.n_trees = n_trees;
    cfg.report.plots = false;
    cfg
}

fn metrics(r: &MetricRow) -> [f64; 4] {
    [r.accuracy, r.precision, r.recall, r.f1]
}

fn setup(n_trees: usize) -> (ExperimentConfig, Prepared) {
    let cfg = config(n_trees);
    let p = prepare(&cfg).unwrap();
    (cfg, p)
}

#[test]
fn bundled_config_parses_and_resolves() {
    let cfg = config(500);
    cfg.validate().unwrap();
    assert!(cfg.data.corpus.is_absolute() || cfg.data.corpus.starts_with(common::synthetic_dir()));
    assert!(cfg.data.corpus.exists() && cfg.data.lexicons.exists());
    assert_eq!(cfg.learners.enabled, ["forest"]);
    assert_eq!(cfg.early.mode, EarlyMode::ContentSize);
    assert!(ExperimentConfig::parse("name = \"x\"\nbogus = 1\n[data]\ncorpus = \"a\"\nlexicons = \"b\"\n").is_err());
    assert!(ExperimentConfig::parse("name = \"x\"\n").is_err());
    let mut bad = cfg.clone();
    bad.eval.method = "holdout".into();
    assert!(matches!(bad.validate(), Err(Error::Config(_))));
    let mut bad = cfg;
    bad.learners.enabled = vec!["svm".into()];
    assert!(bad.validate().is_err());
}

#[test]
fn ablation_rows() {
    let (mut cfg, p) = setup(30);
    cfg.ablate.groups = Some(vec!["BOW".into()]);
    let (m, _) = run_prepared(&cfg, ExperimentKind::Ablate, &p).unwrap();
    assert_eq!(m.rows.len(), 1);
    assert_eq!((m.rows[0].row.as_str(), m.rows[0].folds, m.rows[0].n_articles), ("BOW", 5, 200));

    cfg.ablate.groups = None;
    let (m, _) = run_prepared(&cfg, ExperimentKind::Ablate, &p).unwrap();
    let labels: Vec<&str> = m.rows.iter().map(|r| r.row.as_str()).collect();
    assert_eq!(labels, TABLE3_ROWS);
    let n = |label: &str| m.rows.iter().find(|r| r.row == label).unwrap().n_features;
    assert_eq!(n("Overall"), n("BOW") + n("POS") + n("CFG") + n("DIA+CBA") + n("RR"));
    assert_eq!(n("All-RR"), n("Overall") - n("RR"));

    cfg.ablate.groups = Some(vec!["BOW".into(), "XYZ".into()]);
    match run_prepared(&cfg, ExperimentKind::Ablate, &p) {
        Err(Error::UnknownGroup(g)) => assert_eq!(g, "XYZ"),
        other => panic!("unexpected {:?}", other.map(|_| ())),
    }
}

#[test]
fn subgroup_rows_and_importance() {
    let (cfg, p) = setup(30);
    let (m, _) = run_prepared(&cfg, ExperimentKind::Subgroup, &p).unwrap();
    let labels: Vec<&str> = m.rows.iter().map(|r| r.row.as_str()).collect();
    let expected: Vec<&str> = DIA_ROWS.iter().chain(CBA_ROWS).map(|r| r.0).collect();
    assert_eq!(labels, expected);
    let by = |param: &str, row: &str| m.rows.iter().find(|r| r.param == param && r.row == row).unwrap().n_features;
    assert_eq!(by("DIA", "Overall"), 72);
    assert_eq!(by("CBA", "Overall"), 44);
    assert_eq!(m.importance.len(), 2);
    for t in &m.importance {
        assert!(t.top.len() <= cfg.report.top_k);
        assert!(t.top.windows(2).all(|w| w[0].1 >= w[1].1));
    }
}

#[test]
fn general_run_writes_outputs() {
    let mut cfg = config(30);
    let dir = tempfile::tempdir().unwrap();
    cfg.out_dir = dir.path().to_path_buf();
    cfg.report.plots = true;
    let out = run(&cfg, ExperimentKind::General).unwrap();
    assert!(out.dir.starts_with(dir.path()));
    assert!(out.manifest.run_id.starts_with("synthetic-general-"));
    for f in ["manifest.json", "metrics.csv", "table.txt", "importance.csv", "boxstats.csv"] {
        assert!(out.dir.join(f).is_file(), "missing {f}");
    }
    assert!(out.dir.join("plots").is_dir());
    let text = std::fs::read_to_string(out.dir.join("manifest.json")).unwrap();
    let back: newsstyle::experiments::RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.rows, out.manifest.rows);
    assert_eq!(back.resource_hashes.keys().collect::<Vec<_>>(), ["corpus", "lexicons", "rst", "trees", "vectors"]);
    let mut r = csv::Reader::from_path(out.dir.join("metrics.csv")).unwrap();
    assert_eq!(r.records().count(), out.manifest.rows.len());
    let binned: usize = out.artifacts.histogram.iter().map(|h| h.count).sum();
    assert_eq!(binned, 200);
    assert!(out.artifacts.histogram.iter().all(|h| h.bin_hi <= 1.0));
    assert!(out.dir.join("clickbait_hist.csv").is_file());
}

#[test]
fn sweep_at_full_fractions_equals_general() {
    let (mut cfg, p) = setup(30);
    let (g, _) = run_prepared(&cfg, ExperimentKind::General, &p).unwrap();
    cfg.sweep.grid = Some(vec![[1.0, 1.0]]);
    cfg.sweep.seeds = vec![0];
    let (s, _) = run_prepared(&cfg, ExperimentKind::Sweep, &p).unwrap();
    assert_eq!(s.rows.len(), 1);
    assert_eq!(s.rows[0].param, "fake=1,true=1");
    assert_eq!(metrics(&s.rows[0]), metrics(&g.rows[0]));
    assert_eq!(s.curve.len(), 1);
    assert_eq!(s.curve[0].accuracy_sd, 0.0);

    cfg.sweep.grid = Some(vec![[0.0, 1.0]]);
    assert!(matches!(run_prepared(&cfg, ExperimentKind::Sweep, &p), Err(Error::InvalidArgument(_))));
}

#[test]
fn sweep_grid_shape() {
    let (mut cfg, p) = setup(10);
    cfg.features.levels = vec!["dia".into(), "cba".into()];
    cfg.sweep.group = "DIA+CBA".into();
    cfg.sweep.grid = None;
    cfg.sweep.step = 0.2;
    let (m, _) = run_prepared(&cfg, ExperimentKind::Sweep, &p).unwrap();
    assert_eq!(m.rows.len(), 75);
    assert_eq!(m.curve.len(), 25);
    assert!(m.curve.iter().all(|c| c.seeds == 3));
    let series: BTreeSet<&str> = m.curve.iter().map(|c| c.series.as_str()).collect();
    assert_eq!(series.len(), 5);
    let smallest = m.rows.iter().find(|r| r.param == "fake=0.2,true=0.2").unwrap();
    assert_eq!(smallest.n_articles, 40);
    for c in &m.curve {
        let f1s: Vec<f64> = m.rows.iter().filter(|r| r.param == c.param).map(|r| r.f1).collect();
        let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
        assert!((mean - c.f1_mean).abs() < 1e-12);
    }
}

#[test]
fn early_training_size_at_one_equals_general() {
    let (mut cfg, p) = setup(30);
    let (g, _) = run_prepared(&cfg, ExperimentKind::General, &p).unwrap();
    cfg.early.mode = EarlyMode::TrainingSize;
    cfg.early.grid = Some(vec![0.5, 1.0]);
    let (e, _) = run_prepared(&cfg, ExperimentKind::Early, &p).unwrap();
    assert_eq!(e.rows.len(), 2);
    let full = e.rows.iter().find(|r| r.param == "proportion=1").unwrap();
    assert_eq!(metrics(full), metrics(&g.rows[0]));
    assert_eq!(e.rows.iter().find(|r| r.param == "proportion=0.5").unwrap().n_articles, 100);

    cfg.early.grid = Some(vec![0.0]);
    assert!(run_prepared(&cfg, ExperimentKind::Early, &p).is_err());
}

#[test]
fn early_content_size() {
    let (mut cfg, p) = setup(30);
    let (g, _) = run_prepared(&cfg, ExperimentKind::General, &p).unwrap();
    cfg.early.grid = Some(vec![0.0, 1000.0]);
    let (e, _) = run_prepared(&cfg, ExperimentKind::Early, &p).unwrap();
    let full = e.rows.iter().find(|r| r.param == "paragraphs=1000").unwrap();
    assert_eq!(metrics(full), metrics(&g.rows[0]));
    let head = e.rows.iter().find(|r| r.param == "paragraphs=0").unwrap();
    assert!(head.n_features > 0 && head.n_features < full.n_features);
    for side in head.sides.split(';') {
        assert!(["content", "headline"].contains(&side), "leaked side {side}");
    }
    assert!(full.sides.contains("body"));
    cfg.early.grid = Some(vec![1.5]);
    assert!(run_prepared(&cfg, ExperimentKind::Early, &p).is_err());
}

#[test]
fn split_and_cv_partitions() {
    let (_, p) = setup(1);
    let analyzed = analyze_corpus(&p.corpus, &p.resources, ContentView::Full);
    let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
    let split = partitions(&refs, &EvalMethod::Split { train_fraction: 0.8, stratified: true }, 3).unwrap();
    assert_eq!(split.len(), 1);
    assert_eq!((split[0].0.len(), split[0].1.len()), (160, 40));
    let cv = partitions(&refs, &EvalMethod::Cv { folds: 5, stratified: true }, 3).unwrap();
    let mut seen: Vec<usize> = cv.iter().flat_map(|(_, te)| te.clone()).collect();
    seen.sort_unstable();
    assert_eq!(seen, (0..200).collect::<Vec<_>>());
    for (tr, te) in &cv {
        assert_eq!(tr.len() + te.len(), 200);
        assert!(tr.iter().all(|i| !te.contains(i)));
    }
    assert_eq!(cv, partitions(&refs, &EvalMethod::Cv { folds: 5, stratified: true }, 3).unwrap());
}

#[test]
fn run_id_depends_on_config_and_inputs() {
    let (cfg, p) = setup(30);
    let a = cfg.run_id(ExperimentKind::Ablate, &p.hashes);
    assert_eq!(a, cfg.run_id(ExperimentKind::Ablate, &p.hashes));
    let mut other = cfg.clone();
    other.learners.forest.n_trees = 31;
    assert_ne!(a, other.run_id(ExperimentKind::Ablate, &p.hashes));
    let (m, _) = {
        let mut c = cfg.clone();
        c.ablate.groups = Some(vec!["RR".into()]);
        run_prepared(&c, ExperimentKind::Ablate, &p).unwrap()
    };
    assert_eq!(m.resource_hashes, p.hashes);
    assert_eq!(m.config_hash.len(), 64);
}

#[test]
fn readme_config_and_group_examples_parse() {
    let readme = std::fs::read_to_string(common::repo_root().join("README.md")).unwrap();
    let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
    let block = &readme[start..start + readme[start..].find("```").unwrap()];
    let cfg = ExperimentConfig::parse(block).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.learners.enabled.len(), 4);
    assert_eq!(cfg.data.sif_a, Some(0.001));
    for g in ["BOW+POS+CFG", "All-DIA-CBA", "DIA/Quality/Informality", "CBA/NewsWorthiness"] {
        newsstyle::features::GroupExpr::parse(g).unwrap();
    }
}
