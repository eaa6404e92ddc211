use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tracing::info;

use newsstyle::corpus::{load_corpus, split_mask, Corpus, CorpusFormat, SplitSpec};
use newsstyle::embeddings::{load_vectors, UnigramModel};
use newsstyle::experiments::{self, ExperimentConfig, ExperimentKind};
use newsstyle::features::export::{write_binary, write_csv};
use newsstyle::features::extract::analyze_corpus;
use newsstyle::features::semantic::word_sentences;
use newsstyle::features::{AnalyzedArticle, ContentView, ExtractConfig, FittedExtractor, Level, Resources};
use newsstyle::lexicons::load_lexicon_pack;
use newsstyle::ml::{self, ClassifierModel, TrainingSet};
use newsstyle::synth::{self, SynthConfig};
use newsstyle::textproc::tokenize;
use newsstyle::treebank::{pos_counts, rewrite_rules, ContentSelection, ParseSidecar, TermCounts};
use newsstyle::{Error, Result};

#[derive(Parser)]
#[command(name = "newsstyle", version, about = "Style-based fake news detection toolkit")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus utilities.
    Corpus {
        #[command(subcommand)]
        cmd: CorpusCmd,
    },
    /// Text-processing utilities.
    Text {
        #[command(subcommand)]
        cmd: TextCmd,
    },
    /// Lexicon-pack utilities.
    Lexicon {
        #[command(subcommand)]
        cmd: LexiconCmd,
    },
    /// Parse-tree utilities.
    Syntax {
        #[command(subcommand)]
        cmd: SyntaxCmd,
    },
    /// Sentence-embedding utilities.
    Embed {
        #[command(subcommand)]
        cmd: EmbedCmd,
    },
    /// Feature extraction.
    Features {
        #[command(subcommand)]
        cmd: FeaturesCmd,
    },
    /// Train a classifier on a split of the configured corpus and save it.
    Train {
        #[arg(long, default_value = "forest")]
        model: String,
        #[arg(long)]
        config: PathBuf,
        /// Output model file (JSON).
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Print the top-ranked features of a saved model.
    Importance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Run a configured experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(value_enum, default_value = "general")]
        experiment: RunKind,
    },
    /// Write the synthetic corpus with its sidecars and word vectors.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        fake: usize,
        #[arg(long, default_value_t = 100)]
        real: usize,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
        /// Probability that each level's style matches the article's class.
        #[arg(long, default_value_t = 0.85)]
        agreement: f64,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Article count, label counts and mean paragraphs/sentences/words.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum TextCmd {
    /// Dump paragraph/sentence/token structure as JSON.
    Debug {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum LexiconCmd {
    /// Load a pack and check it has every category the features use.
    Validate {
        #[arg(long)]
        pack: PathBuf,
    },
}

#[derive(Subcommand)]
enum SyntaxCmd {
    /// Per-article POS and rewrite-rule counts as JSON lines.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        trees: PathBuf,
    },
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Estimate word frequencies and the common component from a corpus.
    FitSif {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        a: f64,
    },
}

#[derive(Subcommand)]
enum FeaturesCmd {
    /// Extract a feature matrix for a whole corpus.
    Extract(ExtractArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lexicons: PathBuf,
    #[arg(long)]
    trees: Option<PathBuf>,
    #[arg(long)]
    rst: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Comma-separated subset of bow,pos,cfg,dia,cba,rr.
    #[arg(long, default_value = "bow,pos,cfg,dia,cba,rr")]
    levels: String,
    /// Output path; `.bin` or `.nsfm` selects the binary format, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunKind {
    General,
    Ablate,
    Subgroup,
    Sweep,
    Early,
}

impl From<RunKind> for ExperimentKind {
    fn from(k: RunKind) -> Self {
        match k {
            RunKind::General => ExperimentKind::General,
            RunKind::Ablate => ExperimentKind::Ablate,
            RunKind::Subgroup => ExperimentKind::Subgroup,
            RunKind::Sweep => ExperimentKind::Sweep,
            RunKind::Early => ExperimentKind::Early,
        }
    }
}

/// Writes one line to stdout; a closed pipe ends the process quietly.
fn emit(line: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = writeln!(stdout, "{line}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($t:tt)*) => {
        emit(&format!($($t)*))
    };
}

fn load(path: &Path) -> Result<Corpus> {
    load_corpus(path, CorpusFormat::from_path(path))
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn corpus_stats(input: &Path) -> Result<()> {
    let corpus = load(input)?;
    let s = corpus.stats();
    out!("articles (p): {}", s.articles);
    out!("fake: {}", s.labels.fake);
    out!("true: {}", s.labels.true_);
    out!("unlabeled: {}", s.labels.unlabeled);
    out!("mean paragraphs: {:.3}", s.mean_paragraphs);
    out!("mean sentences: {:.3}", s.mean_sentences);
    out!("mean words: {:.3}", s.mean_words);
    Ok(())
}

fn lexicon_validate(pack: &Path) -> Result<()> {
    let p = load_lexicon_pack(pack)?;
    p.validate()?;
    for (name, c) in &p.categories {
        out!("category {name}: {} patterns", c.len());
    }
    for (name, l) in &p.phrases {
        out!("phrases {name}: {} entries", l.len());
    }
    out!("sentiment: {} scored words", p.sentiment.len());
    out!("ok");
    Ok(())
}

fn syntax_extract(corpus: &Path, trees: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        id: &'a str,
        pos: TermCounts,
        rules: TermCounts,
    }
    let corpus = load(corpus)?;
    let sidecar = ParseSidecar::load(trees)?;
    for a in &corpus.articles {
        let t = sidecar.trees(&a.id, ContentSelection::All);
        let row = Row {
            id: &a.id,
            pos: pos_counts(&t),
            rules: rewrite_rules(&t),
        };
        out!("{}", serde_json::to_string(&row)?);
    }
    Ok(())
}

fn embed_fit_sif(corpus: &Path, vectors: &Path, out: &Path, a: f64) -> Result<()> {
    #[derive(Serialize)]
    struct Sif<'a> {
        sif_a: f64,
        dim: usize,
        common_component: Option<&'a [f64]>,
    }
    let corpus = load(corpus)?;
    let mut model = load_vectors(vectors)?;
    model.sif_a = a;
    let docs: Vec<_> = corpus
        .articles
        .iter()
        .flat_map(|art| [tokenize(&art.headline), tokenize(&art.body)])
        .collect();
    model.unigram = UnigramModel::estimate(docs.iter().flat_map(|d| d.lowercase_words()));
    let sentences: Vec<Vec<&str>> = docs.iter().flat_map(word_sentences).collect();
    model.fit_common_component(&sentences);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write(&out.join("unigram.tsv"), &model.unigram.to_tsv())?;
    let sif = Sif {
        sif_a: a,
        dim: model.dim(),
        common_component: model.common_component(),
    };
    write(&out.join("sif.json"), &serde_json::to_string_pretty(&sif)?)?;
    out!("fit on {} sentences; wrote {}", sentences.len(), out.display());
    Ok(())
}

fn parse_levels(s: &str) -> Result<ExtractConfig> {
    let levels = s
        .split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| Level::from_code(c).ok_or_else(|| Error::UnknownGroup(c.to_string())))
        .collect::<Result<_>>()?;
    Ok(ExtractConfig {
        levels,
        ..ExtractConfig::default()
    })
}

fn features_extract(args: &ExtractArgs) -> Result<()> {
    let config = parse_levels(&args.levels)?;
    let corpus = load(&args.corpus)?;
    let mut res = Resources::new(load_lexicon_pack(&args.lexicons)?);
    if let Some(p) = &args.trees {
        res.trees = Some(ParseSidecar::load(p)?);
    }
    if let Some(p) = &args.rst {
        res.rst = Some(newsstyle::discourse::load_rst_sidecar(p)?);
    }
    if let Some(p) = &args.vectors {
        res.embeddings = Some(load_vectors(p)?);
    }
    let analyzed = analyze_corpus(&corpus, &res, ContentView::Full);
    let refs: Vec<&AnalyzedArticle> = analyzed.iter().collect();
    let fx = FittedExtractor::fit(&refs, &res, &config)?;
    let m = fx.transform_all(&refs)?;
    if args.out.extension().is_some_and(|e| e == "bin" || e == "nsfm") {
        write_binary(&m, &args.out)?;
    } else {
        write_csv(&m, &args.out)?;
    }
    out!("{} articles x {} features -> {}", m.matrix.rows(), m.matrix.cols(), args.out.display());
    Ok(())
}

fn train(model: &str, config: &Path, out: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let spec = cfg.learners.spec_for(model)?;
    let prepared = experiments::prepare(&cfg)?;
    let seed = cfg.eval.seeds[0];
    let mask = split_mask(
        &prepared.corpus,
        &SplitSpec {
            train_fraction: cfg.eval.train_fraction,
            seed,
            stratified: cfg.eval.stratified,
        },
    )?;
    let analyzed = analyze_corpus(&prepared.corpus, &prepared.resources, ContentView::Full);
    let (train, test): (Vec<&AnalyzedArticle>, Vec<&AnalyzedArticle>) = analyzed
        .iter()
        .zip(&mask)
        .fold((Vec::new(), Vec::new()), |(mut tr, mut te), (a, &m)| {
            if m {
                tr.push(a)
            } else {
                te.push(a)
            }
            (tr, te)
        });
    let fx = FittedExtractor::fit(&train, &prepared.resources, &cfg.features.extract_config()?)?;
    let tr = fx.transform_all(&train)?;
    let te = fx.transform_all(&test)?;
    let ytr = tr.label_vector()?;
    let yte = te.label_vector()?;
    info!(features = tr.matrix.cols(), train = train.len(), test = test.len(), "training");
    let fitted = ml::fit(&spec, &TrainingSet::new(&tr.matrix, &ytr)?, seed)?
        .with_schema(tr.schema.names().iter().map(|s| s.to_string()).collect(), tr.schema.hash());
    let m = fitted.evaluate(&TrainingSet::new(&te.matrix, &yte)?)?.metrics();
    out!(
        "{} on {} held-out articles: accuracy {:.3} precision {:.3} recall {:.3} f1 {:.3}",
        spec.name(),
        test.len(),
        m.accuracy,
        m.precision,
        m.recall,
        m.f1
    );
    fitted.save(out)?;
    out!("model written to {}", out.display());
    Ok(())
}

fn importance(model: &Path, top: usize) -> Result<()> {
    let m = ClassifierModel::load(model)?;
    let mut by_level: BTreeMap<String, usize> = BTreeMap::new();
    out!("{:>4}  {:<48}  {:>10}", "Rank", "Feature", "Importance");
    for (i, (name, v)) in m.ranked_importance().into_iter().take(top).enumerate() {
        *by_level.entry(name.split([':', '.']).next().unwrap_or("").to_string()).or_default() += 1;
        out!("{:>4}  {:<48}  {:>10.6}", i + 1, name, v);
    }
    let summary: Vec<String> = by_level.iter().map(|(k, v)| format!("{k}={v}")).collect();
    out!("top-{top} by prefix: {}", summary.join(" "));
    Ok(())
}

fn run(config: &Path, kind: ExperimentKind) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let out = experiments::run(&cfg, kind)?;
    out!("{}", experiments::render_table(&out.manifest.rows).trim_end());
    out!("outputs in {}", out.dir.display());
    Ok(())
}

fn synth_cmd(out: &Path, fake: usize, real: usize, seed: u64, agreement: f64) -> Result<()> {
    let bundle = synth::generate(&SynthConfig {
        n_fake: fake,
        n_true: real,
        seed,
        agreement,
        ..SynthConfig::default()
    })?;
    let paths = synth::write_bundle(&bundle, out)?;
    out!("wrote {} articles to {}", bundle.corpus.len(), paths.corpus.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Corpus {
            cmd: CorpusCmd::Stats { input },
        } => corpus_stats(&input),
        Command::Text {
            cmd: TextCmd::Debug { input },
        } => {
            let text = fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
            print_json(&tokenize(&text))
        }
        Command::Lexicon {
            cmd: LexiconCmd::Validate { pack },
        } => lexicon_validate(&pack),
        Command::Syntax {
            cmd: SyntaxCmd::Extract { corpus, trees },
        } => syntax_extract(&corpus, &trees),
        Command::Embed {
            cmd: EmbedCmd::FitSif { corpus, vectors, out, a },
        } => embed_fit_sif(&corpus, &vectors, &out, a),
        Command::Features {
            cmd: FeaturesCmd::Extract(args),
        } => features_extract(&args),
        Command::Train { model, config, out } => train(&model, &config, &out),
        Command::Importance { model, top } => importance(&model, top),
        Command::Run { config, experiment } => run(&config, experiment.into()),
        Command::Synth {
            out,
            fake,
            real,
            seed,
            agreement,
        } => synth_cmd(&out, fake, real, seed, agreement),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
