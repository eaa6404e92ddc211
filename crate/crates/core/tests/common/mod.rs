#![allow(dead_code)]

use std::path::PathBuf;

use newsstyle::corpus::{Corpus, Label, NewsArticle};
use newsstyle::lexicons::{load_lexicon_pack, LexiconPack};

/// The sentence tree of the constituency-parse figure.
pub const FIGURE_TWO: &str = "(S (NP (DT The) (NNP CIA) (VBN confirmed) (JJ Russian) (NN interference)) \
    (PP (IN in) (NP (DT the) (JJ presidential) (NN election))))";

/// The discourse tree of the rhetorical-structure figure.
pub const FIGURE_THREE: &str = "(elaboration[NS] \
    \"Huffington Post is really running with this story from The Washington Post about the CIA confirming Russian interference in the presidential election.\" \
    (attribution[SN] \"They're saying\" \
      (condition[SN] \"if 100% true,\" \"the courts can PUT HILLARY IN THE WHITE HOUSE!\")))";

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn pack_dir() -> PathBuf {
    repo_root().join("resources/lexicon-pack")
}

pub fn synthetic_dir() -> PathBuf {
    repo_root().join("data/synthetic")
}

pub fn pack() -> LexiconPack {
    load_lexicon_pack(&pack_dir()).expect("starter lexicon pack loads")
}

/// `n_fake` fake then `n_true` true articles, each with `paragraphs` short
/// paragraphs.
pub fn labeled_corpus(n_fake: usize, n_true: usize, paragraphs: usize) -> Corpus {
    let mut articles = Vec::new();
    for i in 0..n_fake + n_true {
        let label = if i < n_fake { Label::Fake } else { Label::True };
        let body = (0..paragraphs)
            .map(|p| format!("Paragraph {p} of story {i} is here."))
            .collect::<Vec<_>>()
            .join("\n\n");
        articles.push(NewsArticle::new(format!("a{i}"), format!("Headline {i}"), body).with_label(label));
    }
    Corpus::new("test", articles).unwrap()
}

/// Vowel-group syllable count written from the stated rule, without
/// looking at the library's implementation.
pub fn syllable_oracle(word: &str) -> u32 {
    let w: Vec<char> = word.to_lowercase().chars().collect();
    let vowel = |c: char| "aeiouy".contains(c);
    let mut groups = 0u32;
    let mut prev = false;
    for &c in &w {
        let v = vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    let silent_e = w[n - 1] == 'e' && !(n >= 2 && w[n - 2] == 'l');
    if silent_e && groups > 0 {
        groups -= 1;
    }
    groups.max(1)
}

/// The five indices from raw counts.
pub fn readability_oracle(words: f64, sentences: f64, syllables: f64, chars: f64, complex: f64) -> [f64; 5] {
    if words == 0.0 || sentences == 0.0 {
        return [0.0; 5];
    }
    let wps = words / sentences;
    let spw = syllables / words;
    let l = 100.0 * chars / words;
    let s = 100.0 * sentences / words;
    [
        206.835 - 1.015 * wps - 84.6 * spw,
        0.39 * wps + 11.8 * spw - 15.59,
        4.71 * (chars / words) + 0.5 * wps - 21.43,
        0.4 * (wps + 100.0 * complex / words),
        0.0588 * l - 0.296 * s - 15.8,
    ]
}

/// 500 × 10 uniform features; the label is the sign of feature 0 plus
/// small noise, the other nine are irrelevant.
pub fn one_informative(seed: u64) -> (newsstyle::ml::Matrix, Vec<u8>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(500);
    let mut y = Vec::with_capacity(500);
    for _ in 0..500 {
        let row: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise: f64 = rng.gen_range(-0.1..0.1);
        y.push(u8::from(row[0] + noise > 0.0));
        rows.push(row);
    }
    (newsstyle::ml::Matrix::from_rows(&rows).unwrap(), y)
}

/// Best training accuracy of a single threshold on one column, trying
/// every cut between sorted values and both orientations.
pub fn best_stump_accuracy(x: &newsstyle::ml::Matrix, y: &[u8], j: usize) -> f64 {
    let mut pairs: Vec<(f64, u8)> = (0..x.rows()).map(|i| (x.get(i, j), y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total_pos = pairs.iter().filter(|p| p.1 == 1).count();
    let mut best = total_pos.max(n - total_pos);
    let mut left_pos = 0;
    for k in 0..n {
        if pairs[k].1 == 1 {
            left_pos += 1;
        }
        if k + 1 < n && pairs[k].0 == pairs[k + 1].0 {
            continue;
        }
        let left = k + 1;
        // Left predicted 0, right predicted 1, or the reverse.
        let a = (left - left_pos) + (total_pos - left_pos);
        best = best.max(a).max(n - a);
    }
    best as f64 / n as f64
}

/// (text, [words, sentences, syllables, word characters, complex words]),
/// counted by hand.
pub const READABILITY_FIXTURES: &[(&str, [f64; 5])] = &[
    ("The cat sat.", [3.0, 1.0, 3.0, 9.0, 0.0]),
    ("The dog ran home. It was happy.", [7.0, 2.0, 8.0, 23.0, 0.0]),
    ("Beautiful education matters.", [3.0, 1.0, 9.0, 25.0, 2.0]),
    ("Wow! Really? Yes.", [3.0, 3.0, 4.0, 12.0, 0.0]),
    (
        "Government officials announced unprecedented investigations yesterday.",
        [6.0, 1.0, 22.0, 64.0, 6.0],
    ),
];
