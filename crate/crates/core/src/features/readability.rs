//! Readability indices over a tokenized text.
//!
//! Coefficients (frozen):
//!
//! ```text
//! FRE  = 206.835 - 1.015 (W/S) - 84.6 (Y/W)
//! FKGL = 0.39 (W/S) + 11.8 (Y/W) - 15.59
//! ARI  = 4.71 (C/W) + 0.5 (W/S) - 21.43
//! GFI  = 0.4 [(W/S) + 100 (X/W)]
//! CLI  = 0.0588 L - 0.296 S' - 15.8,  L = 100 C/W,  S' = 100 S/W
//! ```
//!
//! W words, S sentences, Y syllables, C word characters, X complex words
//! (three or more syllables). Every index is 0 when W or S is 0.

use serde::Serialize;

use crate::textproc::{TokenizedDoc, COMPLEX_WORD_SYLLABLES, LONG_WORD_CHARS};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Readability {
    pub flesch_reading_ease: f64,
    pub flesch_kincaid_grade: f64,
    pub automated_readability: f64,
    pub gunning_fog: f64,
    pub coleman_liau: f64,
    pub words: f64,
    pub syllables: f64,
    pub polysyllables: f64,
    pub characters: f64,
    pub long_words: f64,
}

impl Readability {
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.flesch_reading_ease,
            self.flesch_kincaid_grade,
            self.automated_readability,
            self.gunning_fog,
            self.coleman_liau,
            self.words,
            self.syllables,
            self.polysyllables,
            self.characters,
            self.long_words,
        ]
    }
}

pub fn readability_indices(doc: &TokenizedDoc) -> Readability {
    let (mut words, mut syllables, mut poly, mut chars, mut long) = (0usize, 0u64, 0usize, 0usize, 0usize);
    for t in doc.words() {
        words += 1;
        syllables += t.syllable_count as u64;
        chars += t.char_count;
        if t.syllable_count >= COMPLEX_WORD_SYLLABLES {
            poly += 1;
        }
        if t.char_count >= LONG_WORD_CHARS {
            long += 1;
        }
    }
    let sentences = doc.sentence_count();
    let mut r = Readability {
        words: words as f64,
        syllables: syllables as f64,
        polysyllables: poly as f64,
        characters: chars as f64,
        long_words: long as f64,
        ..Readability::default()
    };
    if words == 0 || sentences == 0 {
        return r;
    }
    let w = words as f64;
    let wps = w / sentences as f64;
    let spw = syllables as f64 / w;
    let cpw = chars as f64 / w;
    r.flesch_reading_ease = 206.835 - 1.015 * wps - 84.6 * spw;
    r.flesch_kincaid_grade = 0.39 * wps + 11.8 * spw - 15.59;
    r.automated_readability = 4.71 * cpw + 0.5 * wps - 21.43;
    r.gunning_fog = 0.4 * (wps + 100.0 * poly as f64 / w);
    r.coleman_liau = 0.0588 * (100.0 * cpw) - 0.296 * (100.0 * sentences as f64 / w) - 15.8;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize;

    #[test]
    fn the_cat_sat() {
        let r = readability_indices(&tokenize("The cat sat."));
        assert!((r.flesch_reading_ease - 119.19).abs() < 1e-9);
        assert!((r.flesch_kincaid_grade - (-2.62)).abs() < 1e-9);
        assert_eq!((r.words, r.syllables, r.characters), (3.0, 3.0, 9.0));
    }

    #[test]
    fn empty_doc_is_all_zero() {
        assert_eq!(readability_indices(&tokenize("")).to_array(), [0.0; 10]);
    }
}
