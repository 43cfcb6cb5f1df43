//! Post text normalisation: markup and link stripping, letter filtering,
//! tokenisation, and dictionary lemmatisation.
//!
//! The order is fixed: clean (tags, links, non-letters, lowercase) → tokenize → lemmatize.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

const LINK_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Strips HTML tags, hyperlinks and every non-letter character, then
/// lowercases and collapses whitespace to single spaces.
///
/// A `<` without a closing `>` on the same line removes the rest of that line.
/// Letters are any Unicode alphabetic code point, so Cyrillic and Latin both survive.
pub fn clean_text(raw: &str) -> String {
    let untagged = strip_tags(raw);
    let mut kept = String::with_capacity(untagged.len());
    for word in untagged.split_whitespace() {
        if is_link(word) {
            continue;
        }
        kept.push_str(word);
        kept.push(' ');
    }
    let lowered = kept.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut pending_space = false;
    for c in lowered.chars() {
        if is_letter(c) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Alphabetic and not numeric; letter-like numerals such as `Ⅻ` are dropped.
fn is_letter(c: char) -> bool {
    c.is_alphabetic() && !c.is_numeric()
}

fn strip_tags(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        out.push(' ');
        let after = &rest[open..];
        let line_end = after.find('\n').unwrap_or(after.len());
        match after[..line_end].find('>') {
            Some(close) => rest = &after[close + 1..],
            None => rest = &after[line_end..],
        }
    }
    out.push_str(rest);
    out
}

fn is_link(word: &str) -> bool {
    LINK_PREFIXES.iter().any(|p| {
        word.len() >= p.len() && word.is_char_boundary(p.len()) && word[..p.len()].eq_ignore_ascii_case(p)
    })
}

/// Splits cleaned text on whitespace runs. Never yields empty tokens.
pub fn tokenize(cleaned: &str) -> Vec<String> {
    cleaned.split_whitespace().map(ToString::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaError {
    #[error("lemma file line {line}: expected `surface<TAB>lemma`")]
    MalformedLine { line: usize },
}

/// Surface form → lemma lookup. Missing forms pass through unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaMap(BTreeMap<String, String>);

impl LemmaMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `surface<TAB>lemma` lines; `#` comments and blank lines are skipped.
    /// A repeated surface form keeps its first lemma.
    pub fn parse_tsv(text: &str) -> Result<Self, LemmaError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(surface), Some(lemma), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(LemmaError::MalformedLine { line: i + 1 });
            };
            let (surface, lemma) = (surface.trim(), lemma.trim());
            if surface.is_empty() || lemma.is_empty() {
                return Err(LemmaError::MalformedLine { line: i + 1 });
            }
            map.entry(surface.to_string()).or_insert_with(|| lemma.to_string());
        }
        Ok(LemmaMap(map))
    }

    pub fn insert(&mut self, surface: &str, lemma: &str) {
        self.0.insert(surface.to_string(), lemma.to_string());
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.0.get(surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>, L: Into<String>> FromIterator<(S, L)> for LemmaMap {
    fn from_iter<I: IntoIterator<Item = (S, L)>>(iter: I) -> Self {
        LemmaMap(iter.into_iter().map(|(s, l)| (s.into(), l.into())).collect())
    }
}

pub fn lemmatize(tokens: &[String], lemmas: &LemmaMap) -> Vec<String> {
    tokens
        .iter()
        .map(|t| lemmas.get(t).map_or_else(|| t.clone(), ToString::to_string))
        .collect()
}

/// `clean_text` → `tokenize` → `lemmatize`.
pub fn preprocess(raw: &str, lemmas: &LemmaMap) -> Vec<String> {
    let tokens = tokenize(&clean_text(raw));
    if lemmas.is_empty() {
        tokens
    } else {
        lemmatize(&tokens, lemmas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn strips_tags_links_and_symbols() {
        assert_eq!(clean_text("<b>Привет</b>, мир! http://x.y"), "привет мир");
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("see https://2ch.hk/b/ and WWW.example.com now"), "see and now");
        assert_eq!(clean_text("a<br>b"), "a b");
    }

    #[test]
    fn unclosed_tag_strips_to_end_of_line() {
        assert_eq!(clean_text("keep <broken tag\nnext line"), "keep next line");
    }

    // Independent character-class oracle: walk code points, map every
    // non-letter to a separator, then collapse.
    fn letters_only_oracle(s: &str) -> String {
        let mut words: Vec<String> = Vec::new();
        let mut cur = String::new();
        for c in s.chars() {
            if c.is_alphabetic() && !c.is_numeric() {
                cur.extend(c.to_lowercase());
            } else if !cur.is_empty() {
                words.push(core::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            words.push(cur);
        }
        words.join(" ")
    }

    #[test]
    fn digits_become_separators() {
        assert_eq!(letters_only_oracle("abc123def"), "abc def");
        assert_eq!(clean_text("abc123def"), letters_only_oracle("abc123def"));
    }

    #[test]
    fn tokenize_collapses_whitespace() {
        assert_eq!(tokenize("привет мир"), toks(&["привет", "мир"]));
        assert_eq!(tokenize("  a   b "), toks(&["a", "b"]));
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn fixture_post_token_count() {
        // 216 characters; counted by hand: 32 words survive cleaning
        // (the link, the tag, digits and punctuation disappear; "50к" leaves "к").
        let post = "Анон, подскажи: какой <i>ноутбук</i> взять для учёбы до 50к? Смотрел на Lenovo и Asus, \
                    но отзывы на https://market.example.ru разные. Нужна батарея часов на 8, \
                    вес до 2кг, экран 15 дюймов. Игры не нужны. Спасибо всем";
        assert_eq!(post.chars().count(), 216);
        let tokens = tokenize(&clean_text(post));
        assert_eq!(tokens.len(), 32, "{tokens:?}");
        assert_eq!(tokens[0], "анон");
        assert!(tokens.contains(&"кг".to_string()));
    }

    #[test]
    fn lemmatize_replaces_only_mapped_positions() {
        let map: LemmaMap = [("кошки", "кошка")].into_iter().collect();
        assert_eq!(lemmatize(&toks(&["кошки"]), &map), toks(&["кошка"]));
        assert_eq!(lemmatize(&toks(&["a", "b"]), &LemmaMap::new()), toks(&["a", "b"]));

        let map: LemmaMap = [("собаки", "собака"), ("бегут", "бежать")].into_iter().collect();
        let input = toks(&["собаки", "и", "кошки", "бегут", "собаки"]);
        let out = lemmatize(&input, &map);
        let changed: Vec<usize> = (0..5).filter(|&i| out[i] != input[i]).collect();
        assert_eq!(changed, vec![0, 3, 4]);
        assert_eq!(out, toks(&["собака", "и", "кошки", "бежать", "собака"]));
    }

    #[test]
    fn lemma_tsv() {
        let map = LemmaMap::parse_tsv("# comment\nкошки\tкошка\n\nкоты\tкот\r\nкошки\tдругое\n").unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map.get("кошки"), Some("кошка"));
        assert_eq!(map.get("коты"), Some("кот"));
        assert_eq!(LemmaMap::parse_tsv("a\n"), Err(LemmaError::MalformedLine { line: 1 }));
        assert_eq!(LemmaMap::parse_tsv("ok\tfine\na\tb\tc\n"), Err(LemmaError::MalformedLine { line: 2 }));
        assert_eq!(LemmaMap::parse_tsv("\tb\n"), Err(LemmaError::MalformedLine { line: 1 }));
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "(?s).{0,80}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
        }

        #[test]
        fn clean_matches_letter_oracle_without_markup(s in "[a-zA-Zа-яА-Я0-9 ,.!?\\-]{0,60}") {
            prop_assert_eq!(clean_text(&s), letters_only_oracle(&s));
        }

        #[test]
        fn tokens_never_empty(s in "(?s).{0,80}") {
            for t in tokenize(&clean_text(&s)) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(|c| c.is_whitespace() || c.is_numeric()));
            }
        }

        #[test]
        fn lemmatize_preserves_length_and_closed_maps_are_idempotent(
            tokens in prop::collection::vec("[a-e]{1,2}", 0..12),
            pairs in prop::collection::vec(("[a-e]{1,2}", "[x-z]"), 0..6),
        ) {
            let tokens: Vec<String> = tokens;
            let mut map: LemmaMap = pairs.into_iter().collect();
            for l in ["x", "y", "z"] {
                map.insert(l, l);
            }
            let once = lemmatize(&tokens, &map);
            prop_assert_eq!(once.len(), tokens.len());
            prop_assert_eq!(lemmatize(&once, &map), once);
        }
    }
}
