//! Configured, manifest-logged experiment runs: general performance, level
//! ablations, semantic sub-group analyses, class-distribution sweeps and
//! early detection.
//!
//! Configuration is TOML. Relative paths are resolved against the config
//! file's directory. Outputs go to `<out_dir>/<run-id>/`: `manifest.json`,
//! `metrics.csv`, `table.txt`, optional `curve.csv`, `importance.csv`,
//! `boxstats.csv`, `clickbait_hist.csv`, and `plots/*.svg`.

pub mod eval;
pub mod plot;
pub mod stats;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::info;

use crate::corpus::{load_corpus, subsample, subsample_by_class, Corpus, CorpusFormat, Label};
use crate::discourse::{load_rst_sidecar, RelationScheme};
use crate::embeddings::{load_vectors, UnigramModel};
use crate::error::{Error, Result};
use crate::features::extract::{analyze_corpus, MinDocFreq};
use crate::features::{AnalyzedArticle, ContentView, ExtractConfig, FittedExtractor, GroupExpr, Level, Resources};
use crate::lexicons::load_lexicon_pack;
use crate::ml::{BoostParams, ForestParams, LearnerSpec, LogisticParams, Metrics, TreeParams};
use crate::treebank::ParseSidecar;

pub use eval::{evaluate_rows, selected_columns, EvalContext, EvalMethod, RowOutcome, RowSpec};

/// The sixteen feature-group rows of the level ablation.
pub const TABLE3_ROWS: &[&str] = &[
    "BOW",
    "POS",
    "CFG",
    "DIA+CBA",
    "RR",
    "BOW+POS+CFG",
    "BOW+DIA+CBA",
    "BOW+RR",
    "POS+CFG+DIA+CBA",
    "POS+CFG+RR",
    "DIA+CBA+RR",
    "All-BOW",
    "All-POS-CFG",
    "All-DIA-CBA",
    "All-RR",
    "Overall",
];

/// Disinformation-attribute rows: (label, group expression).
pub const DIA_ROWS: &[(&str, &str)] = &[
    ("Quality", "DIA/Quality"),
    ("Quality: Informality", "DIA/Quality/Informality"),
    ("Quality: Subjectivity", "DIA/Quality/Subjectivity"),
    ("Quality: Diversity", "DIA/Quality/Diversity"),
    ("Sentiment", "DIA/Sentiment"),
    ("Quantity", "DIA/Quantity"),
    ("Specificity", "DIA/Specificity"),
    ("Specificity: Cognitive Process", "DIA/Specificity/Cognitive"),
    ("Specificity: Perceptual Process", "DIA/Specificity/Perceptual"),
    ("Overall", "DIA"),
];

/// Clickbait-attribute rows.
pub const CBA_ROWS: &[(&str, &str)] = &[
    ("Readability", "CBA/Readability"),
    ("Sensationalism", "CBA/Sensationalism"),
    ("News-worthiness", "CBA/NewsWorthiness"),
    ("Overall", "CBA"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    General,
    Ablate,
    Subgroup,
    Sweep,
    Early,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::General => "general",
            ExperimentKind::Ablate => "ablate",
            ExperimentKind::Subgroup => "subgroup",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Early => "early",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(ExperimentKind::General),
            "ablate" => Ok(ExperimentKind::Ablate),
            "subgroup" => Ok(ExperimentKind::Subgroup),
            "sweep" => Ok(ExperimentKind::Sweep),
            "early" => Ok(ExperimentKind::Early),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub learners: LearnersConfig,
    #[serde(default)]
    pub ablate: AblateConfig,
    #[serde(default)]
    pub subgroup: SubgroupConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub early: EarlyConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub corpus: PathBuf,
    /// `jsonl` or `csv`; inferred from the extension when absent.
    #[serde(default)]
    pub format: Option<String>,
    pub lexicons: PathBuf,
    #[serde(default)]
    pub trees: Option<PathBuf>,
    #[serde(default)]
    pub rst: Option<PathBuf>,
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    /// `token<TAB>count` frequencies for SIF weights; estimated from each
    /// training split when absent.
    #[serde(default)]
    pub unigram: Option<PathBuf>,
    #[serde(default)]
    pub rst_scheme: RelationScheme,
    #[serde(default)]
    pub sif_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub levels: Vec<String>,
    pub min_doc_freq: MinDocFreq,
    pub fit_common_component: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            levels: Level::ALL.iter().map(|l| l.code().to_string()).collect(),
            min_doc_freq: MinDocFreq::default(),
            fit_common_component: true,
        }
    }
}

impl FeatureConfig {
    pub fn extract_config(&self) -> Result<ExtractConfig> {
        let levels = self
            .levels
            .iter()
            .map(|c| Level::from_code(c).ok_or_else(|| Error::UnknownGroup(c.clone())))
            .collect::<Result<_>>()?;
        Ok(ExtractConfig {
            levels,
            min_doc_freq: self.min_doc_freq.clone(),
            fit_common_component: self.fit_common_component,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// `cv` or `split`.
    pub method: String,
    pub folds: usize,
    pub stratified: bool,
    pub train_fraction: f64,
    pub seeds: Vec<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            method: "cv".into(),
            folds: 5,
            stratified: true,
            train_fraction: 0.8,
            seeds: vec![0],
        }
    }
}

impl EvalConfig {
    pub fn method(&self) -> Result<EvalMethod> {
        match self.method.as_str() {
            "cv" => Ok(EvalMethod::Cv {
                folds: self.folds,
                stratified: self.stratified,
            }),
            "split" => Ok(EvalMethod::Split {
                train_fraction: self.train_fraction,
                stratified: self.stratified,
            }),
            other => Err(Error::Config(format!("eval.method must be `cv` or `split`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnersConfig {
    #[serde(rename = "use")]
    pub enabled: Vec<String>,
    pub tree: TreeParams,
    pub forest: ForestParams,
    pub boosted: BoostParams,
    pub logistic: LogisticParams,
}

impl Default for LearnersConfig {
    fn default() -> Self {
        LearnersConfig {
            enabled: ["tree", "forest", "boosted", "logistic"].map(String::from).to_vec(),
            tree: TreeParams::default(),
            forest: ForestParams::default(),
            boosted: BoostParams::default(),
            logistic: LogisticParams::default(),
        }
    }
}

impl LearnersConfig {
    pub fn specs(&self) -> Result<Vec<LearnerSpec>> {
        if self.enabled.is_empty() {
            return Err(Error::Config("learners.use is empty".into()));
        }
        self.enabled.iter().map(|n| self.spec_for(n)).collect()
    }

    /// The named learner with this config's hyperparameters.
    pub fn spec_for(&self, name: &str) -> Result<LearnerSpec> {
        Ok(match LearnerSpec::by_name(name)? {
            LearnerSpec::Tree(_) => LearnerSpec::Tree(self.tree),
            LearnerSpec::Forest(_) => LearnerSpec::Forest(self.forest),
            LearnerSpec::Boosted(_) => LearnerSpec::Boosted(self.boosted),
            LearnerSpec::Logistic(_) => LearnerSpec::Logistic(self.logistic),
        })
    }

    pub fn forest_spec(&self) -> LearnerSpec {
        LearnerSpec::Forest(self.forest)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateConfig {
    /// Group expressions; the sixteen-row level roster when absent.
    pub groups: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubgroupConfig {
    pub families: Vec<String>,
}

impl Default for SubgroupConfig {
    fn default() -> Self {
        SubgroupConfig {
            families: vec!["DIA".into(), "CBA".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit `[fake_fraction, true_fraction]` points.
    pub grid: Option<Vec<[f64; 2]>>,
    /// Step of the default square grid `step, 2·step, …, 1`.
    pub step: f64,
    pub seeds: Vec<u64>,
    pub group: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: None,
            step: 0.1,
            seeds: (0..5).collect(),
            group: "Overall".into(),
        }
    }
}

impl SweepConfig {
    pub fn points(&self) -> Result<Vec<[f64; 2]>> {
        let pts = match &self.grid {
            Some(g) => g.clone(),
            None => {
                let axis = fraction_axis(self.step)?;
                axis.iter().flat_map(|&f| axis.iter().map(move |&t| [f, t])).collect()
            }
        };
        for p in &pts {
            for v in p {
                if !(*v > 0.0 && *v <= 1.0) {
                    return Err(Error::InvalidArgument(format!("sweep fraction {v} outside (0, 1]")));
                }
            }
        }
        if pts.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        Ok(pts)
    }
}

fn fraction_axis(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("step {step} outside (0, 1]")));
    }
    let n = (1.0 / step - 1e-9).ceil() as usize;
    Ok((1..=n).map(|i| ((i as f64 * step).min(1.0) * 1e9).round() / 1e9).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarlyMode {
    TrainingSize,
    ContentSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarlyConfig {
    pub mode: EarlyMode,
    /// Proportions in (0, 1] for `training_size`; paragraph counts for
    /// `content_size`.
    pub grid: Option<Vec<f64>>,
    pub group: String,
}

impl Default for EarlyConfig {
    fn default() -> Self {
        EarlyConfig {
            mode: EarlyMode::TrainingSize,
            grid: None,
            group: "Overall".into(),
        }
    }
}

impl EarlyConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = match (&self.grid, self.mode) {
            (Some(g), _) => g.clone(),
            (None, EarlyMode::TrainingSize) => fraction_axis(0.1)?,
            (None, EarlyMode::ContentSize) => (0..=5).map(f64::from).collect(),
        };
        for &v in &g {
            let ok = match self.mode {
                EarlyMode::TrainingSize => v > 0.0 && v <= 1.0,
                EarlyMode::ContentSize => v >= 0.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!("invalid early-detection grid value {v}")));
            }
        }
        if g.is_empty() {
            return Err(Error::Config("early-detection grid is empty".into()));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub plots: bool,
    pub top_k: usize,
    pub histogram_bins: usize,
    pub box_features: Vec<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            plots: true,
            top_k: 10,
            histogram_bins: 20,
            box_features: [
                "dia.informality.overall.pct",
                "dia.sentiment.emotional.pct",
                "dia.cognitive.certainty.pct",
                "dia.quantity.words_per_sentence",
                "cba.readability.fre",
                "cba.similarity.sentence2vec",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.data.corpus);
        fix(&mut self.data.lexicons);
        for p in [&mut self.data.trees, &mut self.data.rst, &mut self.data.vectors, &mut self.data.unigram]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Checks names, groups and grids without touching the filesystem.
    pub fn validate(&self) -> Result<()> {
        self.features.extract_config()?;
        self.eval.method()?;
        self.learners.specs()?;
        if self.eval.seeds.is_empty() {
            return Err(Error::Config("eval.seeds is empty".into()));
        }
        for g in self.ablate.groups.iter().flatten() {
            GroupExpr::parse(g)?;
        }
        for f in &self.subgroup.families {
            family_rows(f)?;
        }
        GroupExpr::parse(&self.sweep.group)?;
        GroupExpr::parse(&self.early.group)?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    /// `<name>-<kind>-<hash>`, the hash covering the config and the input
    /// file hashes.
    pub fn run_id(&self, kind: ExperimentKind, resource_hashes: &BTreeMap<String, String>) -> String {
        let slug: String = self
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        let mut h = Sha256::new();
        h.update(self.hash().as_bytes());
        for (k, v) in resource_hashes {
            h.update(k.as_bytes());
            h.update(v.as_bytes());
        }
        format!("{slug}-{}-{}", kind.as_str(), &hex(&h.finalize())[..12])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn family_rows(family: &str) -> Result<Vec<RowSpec>> {
    let rows = match family.to_ascii_uppercase().as_str() {
        "DIA" => DIA_ROWS,
        "CBA" => CBA_ROWS,
        other => return Err(Error::UnknownGroup(other.to_string())),
    };
    rows.iter().map(|(l, e)| RowSpec::labelled(l, e)).collect()
}

/// Loaded corpus and resources.
pub struct Prepared {
    pub corpus: Corpus,
    pub resources: Resources,
    pub hashes: BTreeMap<String, String>,
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn dir_hash(dir: &Path) -> Result<String> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let p = e.map_err(|e| Error::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(f.strip_prefix(dir).unwrap_or(&f).to_string_lossy().as_bytes());
        h.update(fs::read(&f).map_err(|e| Error::io(&f, e))?);
    }
    Ok(hex(&h.finalize()))
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let d = &cfg.data;
    let format = match d.format.as_deref() {
        None => CorpusFormat::from_path(&d.corpus),
        Some("jsonl") => CorpusFormat::Jsonl,
        Some("csv") => CorpusFormat::Csv,
        Some(other) => return Err(Error::Config(format!("unknown corpus format `{other}`"))),
    };
    let corpus = load_corpus(&d.corpus, format)?;
    let mut hashes = BTreeMap::new();
    hashes.insert("corpus".to_string(), file_hash(&d.corpus)?);
    hashes.insert("lexicons".to_string(), dir_hash(&d.lexicons)?);
    let mut resources = Resources::new(load_lexicon_pack(&d.lexicons)?);
    resources.rst_scheme = d.rst_scheme;
    if let Some(p) = &d.trees {
        resources.trees = Some(ParseSidecar::load(p)?);
        hashes.insert("trees".into(), file_hash(p)?);
    }
    if let Some(p) = &d.rst {
        resources.rst = Some(load_rst_sidecar(p)?);
        hashes.insert("rst".into(), file_hash(p)?);
    }
    if let Some(p) = &d.vectors {
        let mut model = load_vectors(p)?;
        hashes.insert("vectors".into(), file_hash(p)?);
        if let Some(u) = &d.unigram {
            model.unigram = UnigramModel::load(u)?;
            hashes.insert("unigram".into(), file_hash(u)?);
        }
        if let Some(a) = d.sif_a {
            model.sif_a = a;
        }
        resources.embeddings = Some(model);
    }
    Ok(Prepared {
        corpus,
        resources,
        hashes,
    })
}

/// One metrics row; every row carries its learner, seed and fold count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub experiment: String,
    pub row: String,
    /// Grid point for sweeps and early detection; empty otherwise.
    pub param: String,
    pub learner: String,
    pub seed: u64,
    pub folds: usize,
    pub n_articles: usize,
    pub n_features: usize,
    pub sides: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy_sd: f64,
    pub f1_sd: f64,
}

/// Mean and standard deviation over seeds for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub param: String,
    pub x: f64,
    pub series: String,
    pub learner: String,
    pub seeds: usize,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub group: String,
    pub learner: String,
    pub seed: u64,
    pub top: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: ExperimentKind,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub resource_hashes: BTreeMap<String, String>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub notes: Vec<String>,
    pub rows: Vec<MetricRow>,
    pub curve: Vec<CurvePoint>,
    pub importance: Vec<ImportanceTable>,
}

/// Everything a run produces besides the manifest.
#[derive(Debug, Default)]
pub struct RunArtifacts {
    pub box_rows: Vec<stats::BoxRow>,
    pub histogram: Vec<stats::HistogramRow>,
    pub plots: Vec<(String, String)>,
}

pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub artifacts: RunArtifacts,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn metric_row(kind: ExperimentKind, o: &RowOutcome, param: &str, n_articles: usize) -> MetricRow {
    let sides: Vec<&str> = o
        .sides
        .iter()
        .map(|s| match s {
            crate::features::Side::Content => "content",
            crate::features::Side::Headline => "headline",
            crate::features::Side::Body => "body",
            crate::features::Side::HeadlineAndBody => "headline+body",
        })
        .collect();
    MetricRow {
        experiment: kind.as_str().to_string(),
        row: o.row.clone(),
        param: param.to_string(),
        learner: o.learner.clone(),
        seed: o.seed,
        folds: o.folds,
        n_articles,
        n_features: o.n_features,
        sides: sides.join(";"),
        accuracy: o.report.mean.accuracy,
        precision: o.report.mean.precision,
        recall: o.report.mean.recall,
        f1: o.report.mean.f1,
        accuracy_sd: o.report.sd.accuracy,
        f1_sd: o.report.sd.f1,
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    prepared: &'a Prepared,
    extract: ExtractConfig,
    method: EvalMethod,
    learners: Vec<LearnerSpec>,
}

impl Runner<'_> {
    fn ctx(&self) -> EvalContext<'_> {
        EvalContext {
            resources: &self.prepared.resources,
            extract: &self.extract,
            method: &self.method,
            learners: &self.learners,
        }
    }

    fn analyze(&self, view: ContentView) -> Vec<AnalyzedArticle> {
        analyze_corpus(&self.prepared.corpus, &self.prepared.resources, view)
    }

    fn rows_over_seeds(
        &self,
        kind: ExperimentKind,
        articles: &[&AnalyzedArticle],
        rows: &[RowSpec],
        param: &str,
        headline_only: bool,
    ) -> Result<Vec<MetricRow>> {
        let mut out = Vec::new();
        for &seed in &self.cfg.eval.seeds {
            for o in evaluate_rows(&self.ctx(), articles, rows, seed, headline_only)? {
                out.push(metric_row(kind, &o, param, articles.len()));
            }
        }
        Ok(out)
    }

    fn importance(&self, articles: &[&AnalyzedArticle], groups: &[String]) -> Result<Vec<ImportanceTable>> {
        let seed = self.cfg.eval.seeds[0];
        let spec = self.cfg.learners.forest_spec();
        groups
            .iter()
            .map(|g| {
                let mut top = eval::importance_ranking(
                    &self.prepared.resources,
                    &self.extract,
                    articles,
                    &GroupExpr::parse(g)?,
                    &spec,
                    seed,
                )?;
                top.truncate(self.cfg.report.top_k);
                Ok(ImportanceTable {
                    group: g.clone(),
                    learner: spec.name().into(),
                    seed,
                    top,
                })
            })
            .collect()
    }
}

fn by_id(articles: &[AnalyzedArticle]) -> HashMap<&str, &AnalyzedArticle> {
    articles.iter().map(|a| (a.id.as_str(), a)).collect()
}

fn subset<'a>(index: &HashMap<&str, &'a AnalyzedArticle>, corpus: &Corpus) -> Vec<&'a AnalyzedArticle> {
    corpus.articles.iter().map(|a| index[a.id.as_str()]).collect()
}

fn curve(rows: &[MetricRow], x_of: impl Fn(&str) -> (f64, String)) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<(String, String), Vec<&MetricRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.param.clone(), r.learner.clone())).or_default().push(r);
    }
    let mut out: Vec<CurvePoint> = groups
        .into_iter()
        .map(|((param, learner), rs)| {
            let ms: Vec<Metrics> = rs
                .iter()
                .map(|r| Metrics {
                    accuracy: r.accuracy,
                    precision: r.precision,
                    recall: r.recall,
                    f1: r.f1,
                })
                .collect();
            let (mean, sd) = Metrics::mean_sd(&ms);
            let (x, series) = x_of(&param);
            CurvePoint {
                param,
                x,
                series,
                learner,
                seeds: rs.len(),
                accuracy_mean: mean.accuracy,
                accuracy_sd: sd.accuracy,
                f1_mean: mean.f1,
                f1_sd: sd.f1,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.learner.as_str(), a.series.as_str())
            .cmp(&(b.learner.as_str(), b.series.as_str()))
            .then(a.x.total_cmp(&b.x))
    });
    out
}

fn curve_plots(points: &[CurvePoint], title: &str, x_label: &str, file_stem: &str) -> Vec<(String, String)> {
    let mut learners: Vec<&str> = points.iter().map(|p| p.learner.as_str()).collect();
    learners.dedup();
    learners.sort();
    learners.dedup();
    learners
        .into_iter()
        .map(|l| {
            let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
            for p in points.iter().filter(|p| p.learner == l) {
                series.entry(p.series.as_str()).or_default().push((p.x, p.f1_mean));
            }
            let s: Vec<plot::Series> = series
                .into_iter()
                .map(|(name, points)| plot::Series {
                    name: name.to_string(),
                    points,
                })
                .collect();
            (
                format!("{file_stem}_{l}.svg"),
                plot::line_plot(&format!("{title} ({l})"), x_label, "F1", &s),
            )
        })
        .collect()
}

fn param_value(param: &str, key: &str) -> f64 {
    param
        .split(',')
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.0)
}

/// Per-class box statistics of the semantic columns and the optional
/// clickbait-score histogram.
fn descriptive(r: &Runner<'_>, articles: &[&AnalyzedArticle], artifacts: &mut RunArtifacts) -> Result<()> {
    let semantic: std::collections::BTreeSet<Level> =
        [Level::SemanticDia, Level::SemanticCba].into_iter().filter(|l| r.extract.levels.contains(l)).collect();
    if !semantic.is_empty() {
        let cfg = ExtractConfig {
            levels: semantic,
            ..r.extract.clone()
        };
        let fx = FittedExtractor::fit(articles, &r.prepared.resources, &cfg)?;
        let m = fx.transform_all(articles)?;
        for (j, f) in fx.schema().features.iter().enumerate() {
            for (class, label) in [("fake", Label::Fake), ("true", Label::True)] {
                let values: Vec<f64> = (0..m.matrix.rows())
                    .filter(|&i| m.labels[i] == Some(label))
                    .map(|i| m.matrix.get(i, j))
                    .collect();
                artifacts.box_rows.push(stats::BoxRow::new(&f.name, class, &values));
            }
        }
        if r.cfg.report.plots {
            let groups: Vec<plot::BoxGroup> = r
                .cfg
                .report
                .box_features
                .iter()
                .filter_map(|name| {
                    let rows: Vec<&stats::BoxRow> = artifacts.box_rows.iter().filter(|b| &b.feature == name).collect();
                    (!rows.is_empty()).then(|| plot::BoxGroup {
                        name: name.clone(),
                        boxes: rows.iter().map(|b| (b.class.clone(), b.five())).collect(),
                    })
                })
                .collect();
            if !groups.is_empty() {
                artifacts
                    .plots
                    .push(("boxplots.svg".into(), plot::box_plot("Feature distributions by class", "value", &groups)));
            }
        }
    }

    let scored: Vec<(Label, f64)> = r
        .prepared
        .corpus
        .articles
        .iter()
        .filter_map(|a| Some((a.label?, a.clickbait_score?)))
        .collect();
    if !scored.is_empty() {
        // Scores come either as probabilities or on a 0-100 scale.
        let hi = if scored.iter().all(|s| s.1 <= 1.0) { 1.0 } else { 100.0 };
        for (class, label) in [("fake", Label::Fake), ("true", Label::True)] {
            let v: Vec<f64> = scored.iter().filter(|s| s.0 == label).map(|s| s.1).collect();
            artifacts
                .histogram
                .extend(stats::histogram(class, &v, 0.0, hi, r.cfg.report.histogram_bins));
        }
        if r.cfg.report.plots {
            let series: Vec<plot::Series> = ["fake", "true"]
                .iter()
                .map(|c| plot::Series {
                    name: c.to_string(),
                    points: artifacts
                        .histogram
                        .iter()
                        .filter(|h| h.class == *c)
                        .map(|h| ((h.bin_lo + h.bin_hi) / 2.0, h.density))
                        .collect(),
                })
                .collect();
            artifacts.plots.push((
                "clickbait_pdf.svg".into(),
                plot::line_plot("Clickbait score density", "clickbait score", "density", &series),
            ));
        }
    }
    Ok(())
}

/// Runs an experiment on already-loaded data without writing anything.
pub fn run_prepared(cfg: &ExperimentConfig, kind: ExperimentKind, prepared: &Prepared) -> Result<(RunManifest, RunArtifacts)> {
    cfg.validate()?;
    let started = now();
    let r = Runner {
        cfg,
        prepared,
        extract: cfg.features.extract_config()?,
        method: cfg.eval.method()?,
        learners: cfg.learners.specs()?,
    };
    prepared.corpus.labels()?;
    let mut rows = Vec::new();
    let mut curve_points = Vec::new();
    let mut importance = Vec::new();
    let mut artifacts = RunArtifacts::default();
    let mut notes = vec![
        "vocabularies and the SIF common component are fit on each training split".to_string(),
        "positive class = fake (label 1)".to_string(),
    ];
    info!(run = kind.as_str(), articles = prepared.corpus.len(), "starting run");
    match kind {
        ExperimentKind::General => {
            let analyzed = r.analyze(ContentView::Full);
            let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
            rows = r.rows_over_seeds(kind, &refs, &[RowSpec::parse("Overall")?], "", false)?;
            let levels: Vec<String> = Level::ALL
                .iter()
                .filter(|l| r.extract.levels.contains(l))
                .map(|l| l.code().to_string())
                .collect();
            importance = r.importance(&refs, &levels)?;
            descriptive(&r, &refs, &mut artifacts)?;
        }
        ExperimentKind::Ablate => {
            let groups: Vec<String> = match &cfg.ablate.groups {
                Some(g) => g.clone(),
                None => TABLE3_ROWS.iter().map(|s| s.to_string()).collect(),
            };
            let specs = groups.iter().map(|g| RowSpec::parse(g)).collect::<Result<Vec<_>>>()?;
            let analyzed = r.analyze(ContentView::Full);
            let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
            rows = r.rows_over_seeds(kind, &refs, &specs, "", false)?;
        }
        ExperimentKind::Subgroup => {
            let analyzed = r.analyze(ContentView::Full);
            let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
            for family in &cfg.subgroup.families {
                let specs = family_rows(family)?;
                let mut fr = r.rows_over_seeds(kind, &refs, &specs, &family.to_ascii_uppercase(), false)?;
                rows.append(&mut fr);
                importance.extend(r.importance(&refs, &[family.to_ascii_uppercase()])?);
            }
        }
        ExperimentKind::Sweep => {
            let analyzed = r.analyze(ContentView::Full);
            let index = by_id(&analyzed);
            let spec = [RowSpec::parse(&cfg.sweep.group)?];
            for [ff, tf] in cfg.sweep.points()? {
                let param = format!("fake={ff},true={tf}");
                for &seed in &cfg.sweep.seeds {
                    let sub = subsample_by_class(&prepared.corpus, ff, tf, seed)?;
                    let arts = subset(&index, &sub);
                    for o in evaluate_rows(&r.ctx(), &arts, &spec, seed, false)? {
                        rows.push(metric_row(kind, &o, &param, arts.len()));
                    }
                }
            }
            curve_points = curve(&rows, |p| (param_value(p, "fake"), format!("true={}", param_value(p, "true"))));
            if cfg.report.plots {
                artifacts.plots.extend(curve_plots(&curve_points, "F1 by class distribution", "fraction of fake news", "sweep"));
            }
            notes.push("sweep series are keyed by the fraction of true news kept".into());
        }
        ExperimentKind::Early => {
            let spec = [RowSpec::parse(&cfg.early.group)?];
            match cfg.early.mode {
                EarlyMode::TrainingSize => {
                    let analyzed = r.analyze(ContentView::Full);
                    let index = by_id(&analyzed);
                    for p in cfg.early.grid()? {
                        let param = format!("proportion={p}");
                        for &seed in &cfg.eval.seeds {
                            let sub = subsample(&prepared.corpus, p, seed)?;
                            let arts = subset(&index, &sub);
                            for o in evaluate_rows(&r.ctx(), &arts, &spec, seed, false)? {
                                rows.push(metric_row(kind, &o, &param, arts.len()));
                            }
                        }
                    }
                    curve_points = curve(&rows, |p| (param_value(p, "proportion"), "training size".into()));
                }
                EarlyMode::ContentSize => {
                    for n in cfg.early.grid()? {
                        let n = n as usize;
                        let param = format!("paragraphs={n}");
                        for &seed in &cfg.eval.seeds {
                            let analyzed = r.analyze(ContentView::Paragraphs { n, seed });
                            let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
                            for o in evaluate_rows(&r.ctx(), &refs, &spec, seed, n == 0)? {
                                rows.push(metric_row(kind, &o, &param, refs.len()));
                            }
                        }
                    }
                    curve_points = curve(&rows, |p| (param_value(p, "paragraphs"), "content size".into()));
                    notes.push("paragraphs=0 uses headline-side columns only; discourse features need the full body".into());
                }
            }
            if cfg.report.plots {
                let x = match cfg.early.mode {
                    EarlyMode::TrainingSize => "proportion of articles",
                    EarlyMode::ContentSize => "body paragraphs",
                };
                artifacts.plots.extend(curve_plots(&curve_points, "Early detection", x, "early"));
            }
        }
    }
    let manifest = RunManifest {
        run_id: cfg.run_id(kind, &prepared.hashes),
        experiment: kind,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        config_hash: cfg.hash(),
        resource_hashes: prepared.hashes.clone(),
        started_unix: started,
        finished_unix: now(),
        notes,
        rows,
        curve: curve_points,
        importance,
    };
    Ok((manifest, artifacts))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Fixed-width text table of the metric rows.
pub fn render_table(rows: &[MetricRow]) -> String {
    let width = rows.iter().map(|r| r.row.len()).max().unwrap_or(3).max(5);
    let pw = rows.iter().map(|r| r.param.len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:<pw$}  {:<8}  {:>4}  {:>6}  {:>6}  {:>6}  {:>6}",
        "Group", "", "Learner", "Seed", "Acc.", "Pre.", "Rec.", "F1"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:<pw$}  {:<8}  {:>4}  {:>6.3}  {:>6.3}  {:>6.3}  {:>6.3}",
            r.row, r.param, r.learner, r.seed, r.accuracy, r.precision, r.recall, r.f1
        );
    }
    out
}

pub fn write_outputs(dir: &Path, manifest: &RunManifest, artifacts: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir.join("plots")).map_err(|e| Error::io(dir, e))?;
    let m = dir.join("manifest.json");
    fs::write(&m, serde_json::to_string_pretty(manifest)?).map_err(|e| Error::io(&m, e))?;
    write_csv(&dir.join("metrics.csv"), &manifest.rows)?;
    let t = dir.join("table.txt");
    fs::write(&t, render_table(&manifest.rows)).map_err(|e| Error::io(&t, e))?;
    if !manifest.curve.is_empty() {
        write_csv(&dir.join("curve.csv"), &manifest.curve)?;
    }
    if !manifest.importance.is_empty() {
        #[derive(Serialize)]
        struct Imp<'a> {
            group: &'a str,
            learner: &'a str,
            seed: u64,
            rank: usize,
            feature: &'a str,
            importance: f64,
        }
        let flat: Vec<Imp<'_>> = manifest
            .importance
            .iter()
            .flat_map(|t| {
                t.top.iter().enumerate().map(move |(i, (f, v))| Imp {
                    group: &t.group,
                    learner: &t.learner,
                    seed: t.seed,
                    rank: i + 1,
                    feature: f,
                    importance: *v,
                })
            })
            .collect();
        write_csv(&dir.join("importance.csv"), &flat)?;
    }
    if !artifacts.box_rows.is_empty() {
        write_csv(&dir.join("boxstats.csv"), &artifacts.box_rows)?;
    }
    if !artifacts.histogram.is_empty() {
        write_csv(&dir.join("clickbait_hist.csv"), &artifacts.histogram)?;
    }
    for (name, svg) in &artifacts.plots {
        let p = dir.join("plots").join(name);
        fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

/// Loads resources, runs the experiment and writes its outputs.
pub fn run(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<RunOutput> {
    let prepared = prepare(cfg)?;
    let (manifest, artifacts) = run_prepared(cfg, kind, &prepared)?;
    let dir = cfg.out_dir.join(&manifest.run_id);
    write_outputs(&dir, &manifest, &artifacts)?;
    info!(dir = %dir.display(), rows = manifest.rows.len(), "run complete");
    Ok(RunOutput {
        dir,
        manifest,
        artifacts,
    })
}
