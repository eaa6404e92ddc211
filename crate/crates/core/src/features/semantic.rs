//! The semantic slice: disinformation-related attributes over the body and
//! clickbait-related attributes over the headline.

use std::collections::HashSet;

use crate::embeddings::{cosine, EmbeddingModel};
use crate::lexicons::{
    count_category, count_phrases, count_union, polarity, CategoryLexicon, LexiconPack, COGNITIVE_CATEGORIES,
    EMOTION_CATEGORIES, INFORMALITY_CATEGORIES, PERCEPTUAL_CATEGORIES,
};
use crate::textproc::{quantity_profile, ratio, TokenizedDoc};

use super::readability::readability_indices;
use super::schema::SEMANTIC_LEN;

/// POS-tag prefixes for the diversity features, in inventory order.
const DIVERSITY_TAGS: [&str; 4] = ["NN", "VB", "JJ", "RB"];

/// Inputs for one article. `body_tags` are `(tag, token)` pairs from the
/// body's parse trees; without them the part-of-speech diversity features
/// are 0.
pub struct SemanticInput<'a> {
    pub headline: &'a TokenizedDoc,
    pub body: &'a TokenizedDoc,
    pub body_tags: &'a [(String, String)],
}

/// The 116 semantic values in the order of [`super::schema::semantic_inventory`].
pub fn semantic_features(input: &SemanticInput<'_>, pack: &LexiconPack, emb: Option<&EmbeddingModel>) -> Vec<f64> {
    let mut out = Vec::with_capacity(SEMANTIC_LEN);
    let head = input.headline;
    let body = input.body;
    let body_words = body.lowercase_words();
    let head_words = head.lowercase_words();

    informality(&mut out, &body_words, pack);

    // Diversity.
    let function = pack.category("function");
    let n_words = body_words.len();
    push_type_ratio(&mut out, body_words.iter().copied(), n_words);
    let content: Vec<&str> = body_words.iter().copied().filter(|w| !function.contains_word(w)).collect();
    push_type_ratio(&mut out, content.iter().copied(), content.len());
    for prefix in DIVERSITY_TAGS {
        let tokens: Vec<&str> = input
            .body_tags
            .iter()
            .filter(|(tag, _)| tag.starts_with(prefix))
            .map(|(_, tok)| tok.as_str())
            .collect();
        let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        push_type_ratio(&mut out, lowered.iter().map(String::as_str), lowered.len());
    }

    for cat in ["biased", "report", "factive"] {
        push_pair(&mut out, count_category(body, pack.category(cat)));
    }

    // Sentiment.
    for cat in EMOTION_CATEGORIES {
        push_pair(&mut out, count_category(body, pack.category(cat)));
    }
    push_pair(&mut out, count_union(&body_words, &pack.categories_named(EMOTION_CATEGORIES)));
    out.push(polarity(body, &pack.sentiment));

    out.extend(quantity_profile(body).to_array());

    for cats in [COGNITIVE_CATEGORIES, PERCEPTUAL_CATEGORIES] {
        for cat in cats {
            push_pair(&mut out, count_category(body, pack.category(cat)));
        }
        push_pair(&mut out, count_union(&body_words, &pack.categories_named(cats)));
    }

    // Clickbait patterns.
    let phrases = count_phrases(&head_words, pack.phrase_list("clickbait_phrases")) as f64;
    let expressions = count_phrases(&head_words, pack.phrase_list("clickbait_expressions")) as f64;
    out.extend([phrases, expressions, phrases + expressions]);

    out.extend(readability_indices(head).to_array());

    for cat in ["positive", "negative"] {
        push_pair(&mut out, count_category(head, pack.category(cat)));
    }
    push_pair(&mut out, count_union(&head_words, &pack.categories_named(EMOTION_CATEGORIES)));
    out.push(polarity(head, &pack.sentiment));

    let punct = |pred: &dyn Fn(&str) -> bool| head.tokens().filter(|t| !t.is_word && pred(&t.surface)).count() as f64;
    let exclamation = punct(&|s| s == "!");
    let question = punct(&|s| s == "?");
    let ellipsis = head.tokens().filter(|t| t.is_ellipsis()).count() as f64;
    out.extend([exclamation, question, ellipsis, exclamation + question + ellipsis]);

    out.extend(similarity(head, body, emb));

    // News-worthiness quality: content, function and stop words.
    let head_content = head_words.iter().filter(|w| !function.contains_word(w)).count();
    out.push(head_content as f64);
    out.push(ratio(head_content as f64, head_words.len() as f64));
    push_pair(&mut out, count_category(head, function));
    push_pair(&mut out, count_category(head, pack.category("stop")));

    informality(&mut out, &head_words, pack);

    debug_assert_eq!(out.len(), SEMANTIC_LEN);
    out
}

fn informality(out: &mut Vec<f64>, words: &[&str], pack: &LexiconPack) {
    let cats: Vec<&CategoryLexicon> = pack.categories_named(INFORMALITY_CATEGORIES);
    for c in &cats {
        push_pair(out, count_union(words, &[c]));
    }
    push_pair(out, count_union(words, &cats));
}

fn push_pair(out: &mut Vec<f64>, (n, pct): (usize, f64)) {
    out.push(n as f64);
    out.push(pct);
}

/// Distinct items and distinct items per item.
fn push_type_ratio<'a>(out: &mut Vec<f64>, items: impl Iterator<Item = &'a str>, total: usize) {
    let distinct = items.collect::<HashSet<_>>().len();
    out.push(distinct as f64);
    out.push(ratio(distinct as f64, total as f64));
}

/// Cosine similarity between headline and body: averaged word vectors, then
/// SIF text embeddings. Zero when either side is empty or no model is given.
pub fn similarity(head: &TokenizedDoc, body: &TokenizedDoc, emb: Option<&EmbeddingModel>) -> [f64; 2] {
    let Some(emb) = emb else {
        return [0.0, 0.0];
    };
    if head.word_count() == 0 || body.word_count() == 0 {
        return [0.0, 0.0];
    }
    let w2v = cosine(
        &emb.avg_word_embedding(&head.lowercase_words()),
        &emb.avg_word_embedding(&body.lowercase_words()),
    );
    let (hs, bs) = (word_sentences(head), word_sentences(body));
    let s2v = cosine(&emb.sif_text_embedding(&hs), &emb.sif_text_embedding(&bs));
    [w2v, s2v]
}

/// Lowercase word tokens of each sentence.
pub fn word_sentences(doc: &TokenizedDoc) -> Vec<Vec<&str>> {
    doc.sentences()
        .map(|s| s.iter().filter(|t| t.is_word).map(|t| t.lowercase.as_str()).collect())
        .collect()
}
