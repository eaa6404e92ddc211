mod common;

use std::fs;
use std::path::Path;

use newsstyle::lexicons::{
    count_category, count_phrases, count_union, load_lexicon_pack, polarity, CategoryLexicon, PhraseList, ScoredLexicon,
    REQUIRED_CATEGORIES, REQUIRED_PHRASE_LISTS,
};
use newsstyle::textproc::tokenize;
use newsstyle::Error;
use proptest::prelude::*;

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dst = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &dst);
        } else {
            fs::copy(e.path(), dst).unwrap();
        }
    }
}

#[test]
fn starter_pack_is_complete() {
    let pack = common::pack();
    pack.validate().unwrap();
    for c in REQUIRED_CATEGORIES {
        assert!(!pack.category(c).is_empty(), "{c}");
    }
    for p in REQUIRED_PHRASE_LISTS {
        assert!(!pack.phrase_list(p).is_empty(), "{p}");
    }
    assert!(!pack.sentiment.is_empty());
}

#[test]
fn missing_category_is_named() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&common::pack_dir(), dir.path());
    fs::remove_file(dir.path().join("categories/swear.txt")).unwrap();
    let err = load_lexicon_pack(dir.path()).and_then(|p| p.validate()).unwrap_err();
    match &err {
        Error::MissingCategories(names) => assert_eq!(names, &vec!["swear".to_string()]),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("swear"));
}

#[test]
fn malformed_pattern_is_rejected() {
    assert!(matches!(CategoryLexicon::new("x", &["ab*c"]), Err(Error::Lexicon { .. })));
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&common::pack_dir(), dir.path());
    fs::write(dir.path().join("categories/swear.txt"), "# comment\ndamn\nab*c\n").unwrap();
    match load_lexicon_pack(dir.path()) {
        Err(Error::Lexicon { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn out_of_range_score_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&common::pack_dir(), dir.path());
    fs::write(dir.path().join("scored/sentiment.tsv"), "good\t0.5\nawful\t-1.5\n").unwrap();
    assert!(matches!(load_lexicon_pack(dir.path()), Err(Error::Lexicon { line: 2, .. })));
}

#[test]
fn count_category_examples() {
    let insight = CategoryLexicon::new("insight", &["think*"]).unwrap();
    let (n, p) = count_category(&tokenize("I think so"), &insight);
    assert_eq!(n, 1);
    assert!((p - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(count_category(&tokenize(""), &insight), (0, 0.0));
    let cert = CategoryLexicon::new("certainty", &["certain*"]).unwrap();
    assert_eq!(count_category(&tokenize("certainly certain"), &cert), (2, 1.0));
    assert_eq!(count_category(&tokenize("CERTAIN uncertain"), &cert), (1, 0.5));
}

#[test]
fn union_counts_each_token_once() {
    let a = CategoryLexicon::new("a", &["lol", "omg"]).unwrap();
    let b = CategoryLexicon::new("b", &["lol*"]).unwrap();
    let words = ["lol", "omg", "lolz", "fine"];
    assert_eq!(count_union(&words, &[&a, &b]), (3, 0.75));
}

#[test]
fn count_phrases_examples() {
    let p = PhraseList::new("p", &["will blow your mind", "can change your life"]).unwrap();
    let words = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let w = words("this will blow your mind");
    assert_eq!(count_phrases(&w.iter().map(String::as_str).collect::<Vec<_>>(), &p), 1);
    assert_eq!(count_phrases(&[], &p), 0);
    let w = words("can change your life can change your life");
    assert_eq!(count_phrases(&w.iter().map(String::as_str).collect::<Vec<_>>(), &p), 2);
}

#[test]
fn phrases_prefer_longest_match() {
    let p = PhraseList::new("p", &["you won't", "you won't believe"]).unwrap();
    let w = ["you", "won't", "believe", "you", "won't"];
    assert_eq!(count_phrases(&w, &p), 2);
    let q = PhraseList::new("q", &["a b", "b c"]).unwrap();
    assert_eq!(count_phrases(&["a", "b", "c"], &q), 1);
}

#[test]
fn polarity_examples() {
    let s = ScoredLexicon::new([("good".to_string(), 1.0), ("great".to_string(), 1.0)]).unwrap();
    assert_eq!(polarity(&tokenize("Good and great."), &s), 1.0);
    let s = ScoredLexicon::new([("up".to_string(), 0.5), ("down".to_string(), -0.5)]).unwrap();
    assert_eq!(polarity(&tokenize("up down"), &s), 0.0);
    assert_eq!(polarity(&tokenize("nothing here"), &s), 0.0);
    assert!(ScoredLexicon::new([("x".to_string(), 2.0)]).is_err());
}

fn naive_count(words: &[&str], patterns: &[&str]) -> usize {
    words
        .iter()
        .filter(|w| {
            patterns.iter().any(|p| match p.strip_suffix('*') {
                Some(prefix) => w.starts_with(prefix),
                None => *w == p,
            })
        })
        .count()
}

proptest! {
    #[test]
    fn category_counts_match_naive_oracle(
        words in prop::collection::vec("[a-d]{1,4}", 0..30),
        patterns in prop::collection::btree_set("[a-d]{1,3}\\*?", 1..6),
    ) {
        let patterns: Vec<&str> = patterns.iter().map(String::as_str).collect();
        let lex = CategoryLexicon::new("c", &patterns).unwrap();
        let text = words.join(" ");
        let doc = tokenize(&text);
        let (n, p) = count_category(&doc, &lex);
        let lw = doc.lowercase_words();
        prop_assert_eq!(n, naive_count(&lw, &patterns));
        prop_assert!(n <= lw.len());
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn polarity_is_bounded(scores in prop::collection::vec(-1.0f64..=1.0, 1..10), picks in prop::collection::vec(0usize..12, 0..20)) {
        let lex = ScoredLexicon::new(scores.iter().enumerate().map(|(i, &s)| (format!("w{i}"), s))).unwrap();
        let text = picks.iter().map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let v = polarity(&tokenize(&text), &lex);
        prop_assert!((-1.0..=1.0).contains(&v));
    }
}
