//! Deterministic tokenization, sentence segmentation and surface counts.
//!
//! Paragraphs are separated by blank lines. Tokens come from whitespace
//! splitting with leading and trailing punctuation peeled off as separate
//! tokens; internal punctuation (apostrophes, hyphens, decimal points) stays
//! attached, so "don't" and "3.5" are single tokens. A sentence ends at `.`,
//! `!`, `?` or an ellipsis (plus any closing quotes or brackets) when the
//! next word starts with a capital letter or the paragraph ends.

use serde::Serialize;

use crate::error::{Error, Result};

/// Words with at least this many characters count as long words.
pub const LONG_WORD_CHARS: usize = 7;
/// Words with at least this many syllables count as complex (polysyllabic).
pub const COMPLEX_WORD_SYLLABLES: u32 = 3;

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "inc.", "ltd.", "co.",
    "corp.", "gov.", "sen.", "rep.", "gen.", "lt.", "col.", "capt.", "mt.", "no.", "jan.", "feb.",
    "mar.", "apr.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.", "e.g.", "i.e.",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    pub lowercase: String,
    pub is_word: bool,
    pub char_count: usize,
    pub syllable_count: u32,
}

impl Token {
    fn new(surface: &str) -> Token {
        let lowercase = surface.to_lowercase();
        let is_word = surface.chars().any(char::is_alphanumeric);
        let syllable_count = if is_word {
            count_syllables(&lowercase).unwrap_or(1)
        } else {
            0
        };
        Token {
            surface: surface.to_string(),
            char_count: surface.chars().count(),
            lowercase,
            is_word,
            syllable_count,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.surface.as_str(), "." | "!" | "?" | "…") || is_dot_run(&self.surface)
    }

    pub fn is_ellipsis(&self) -> bool {
        self.surface == "…" || is_dot_run(&self.surface)
    }
}

fn is_dot_run(s: &str) -> bool {
    s.len() >= 2 && s.bytes().all(|b| b == b'.')
}

fn is_closer(s: &str) -> bool {
    matches!(s, "\"" | "'" | ")" | "]" | "”" | "’" | "»")
}

pub type Sentence = Vec<Token>;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TokenizedDoc {
    pub paragraphs: Vec<Vec<Sentence>>,
}

impl TokenizedDoc {
    pub fn is_empty(&self) -> bool {
        self.paragraphs.is_empty()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.paragraphs.iter().flatten()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences().flatten()
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens().filter(|t| t.is_word)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn sentence_count(&self) -> usize {
        self.paragraphs.iter().map(Vec::len).sum()
    }

    /// Lowercase word tokens in document order.
    pub fn lowercase_words(&self) -> Vec<&str> {
        self.words().map(|t| t.lowercase.as_str()).collect()
    }

    /// Tokens joined by spaces, paragraphs by a blank line.
    pub fn to_text(&self) -> String {
        self.paragraphs
            .iter()
            .map(|p| {
                p.iter()
                    .flatten()
                    .map(|t| t.surface.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    /// Concatenates two documents paragraph-wise.
    pub fn concat(&self, other: &TokenizedDoc) -> TokenizedDoc {
        let mut paragraphs = self.paragraphs.clone();
        paragraphs.extend(other.paragraphs.iter().cloned());
        TokenizedDoc { paragraphs }
    }
}

/// Splits on runs of blank (whitespace-only) lines, returning trimmed paragraph slices.
pub fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0usize;
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let blank = line.trim().is_empty();
        if blank {
            if let Some(s) = start.take() {
                out.push(text[s..end].trim());
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        out.push(text[s..end].trim());
    }
    out
}

pub fn tokenize(text: &str) -> TokenizedDoc {
    let normalized;
    let text = if text.contains('\r') {
        normalized = text.replace("\r\n", "\n");
        normalized.as_str()
    } else {
        text
    };
    let paragraphs = split_paragraphs(text)
        .into_iter()
        .map(|p| segment_sentences(tokenize_paragraph(p)))
        .filter(|p| !p.is_empty())
        .collect();
    TokenizedDoc { paragraphs }
}

fn is_abbreviation(s: &str) -> bool {
    let lower = s.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Dotted initials such as "a.m." or "u.n.".
    let Some(stem) = lower.strip_suffix('.') else {
        return false;
    };
    let parts: Vec<&str> = stem.split('.').collect();
    parts.len() >= 2 && parts.iter().all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic))
}

fn tokenize_paragraph(paragraph: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in paragraph.split_whitespace() {
        let chars: Vec<(usize, char)> = chunk.char_indices().collect();
        let n = chars.len();
        let byte_at = |i: usize| if i < n { chars[i].0 } else { chunk.len() };

        // Leading punctuation.
        let mut lo = 0;
        while lo < n && !chars[lo].1.is_alphanumeric() {
            let mut hi = lo + 1;
            if chars[lo].1 == '.' {
                while hi < n && chars[hi].1 == '.' {
                    hi += 1;
                }
            }
            out.push(Token::new(&chunk[byte_at(lo)..byte_at(hi)]));
            lo = hi;
        }
        if lo == n {
            continue;
        }

        // Trailing punctuation, peeled right to left unless the rest is an abbreviation.
        let mut hi = n;
        let mut trailing: Vec<&str> = Vec::new();
        while hi > lo && !chars[hi - 1].1.is_alphanumeric() {
            if chars[hi - 1].1 == '.' && is_abbreviation(&chunk[byte_at(lo)..byte_at(hi)]) {
                break;
            }
            let mut start = hi - 1;
            if chars[start].1 == '.' {
                while start > lo && chars[start - 1].1 == '.' {
                    start -= 1;
                }
            }
            trailing.push(&chunk[byte_at(start)..byte_at(hi)]);
            hi = start;
        }
        out.push(Token::new(&chunk[byte_at(lo)..byte_at(hi)]));
        out.extend(trailing.into_iter().rev().map(Token::new));
    }
    out
}

fn starts_sentence(rest: &[Token]) -> bool {
    rest.iter()
        .find(|t| t.is_word)
        .and_then(|t| t.surface.chars().next())
        .is_some_and(char::is_uppercase)
        && rest.iter().take_while(|t| !t.is_word).all(|t| !t.is_terminal())
}

fn segment_sentences(rest: Vec<Token>) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    let mut i = 0;
    while i < rest.len() {
        let terminal = rest[i].is_terminal();
        current.push(rest[i].clone());
        i += 1;
        if terminal {
            while i < rest.len() && (rest[i].is_terminal() || is_closer(&rest[i].surface)) {
                current.push(rest[i].clone());
                i += 1;
            }
            if i < rest.len() && starts_sentence(&rest[i..]) {
                sentences.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Vowel-group syllable estimate: maximal runs of `[aeiouy]`, minus one for
/// a trailing silent "e" (but not "le"), floored at 1.
pub fn count_syllables(word: &str) -> Result<u32> {
    if word.is_empty() {
        return Err(Error::InvalidArgument("cannot count syllables of an empty word".into()));
    }
    let lower = word.to_lowercase();
    let mut groups = 0u32;
    let mut in_group = false;
    for c in lower.chars() {
        let vowel = matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
        if vowel && !in_group {
            groups += 1;
        }
        in_group = vowel;
    }
    if lower.ends_with('e') && !lower.ends_with("le") {
        groups = groups.saturating_sub(1);
    }
    Ok(groups.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuantityProfile {
    pub characters: f64,
    pub words: f64,
    pub sentences: f64,
    pub paragraphs: f64,
    pub chars_per_word: f64,
    pub words_per_sentence: f64,
    pub sentences_per_paragraph: f64,
}

impl QuantityProfile {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.characters,
            self.words,
            self.sentences,
            self.paragraphs,
            self.chars_per_word,
            self.words_per_sentence,
            self.sentences_per_paragraph,
        ]
    }
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Character counts cover word tokens only; punctuation is excluded.
pub fn quantity_profile(doc: &TokenizedDoc) -> QuantityProfile {
    let words = doc.word_count() as f64;
    let characters = doc.words().map(|t| t.char_count).sum::<usize>() as f64;
    let sentences = doc.sentence_count() as f64;
    let paragraphs = doc.paragraphs.len() as f64;
    QuantityProfile {
        characters,
        words,
        sentences,
        paragraphs,
        chars_per_word: ratio(characters, words),
        words_per_sentence: ratio(words, sentences),
        sentences_per_paragraph: ratio(sentences, paragraphs),
    }
}
