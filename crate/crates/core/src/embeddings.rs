//! Word-embedding tables read from word2vec or GloVe text files.
//!
//! Both formats are one `token c1 c2 ... cD` line per word; word2vec
//! additionally starts with a `V D` header. The header is recognised when the
//! first line has exactly two positive-integer fields and the second field
//! matches the width of the line that follows.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimMismatch { line: usize, expected: usize, found: usize },
    #[error("embedding table is empty")]
    EmptyTable,
    #[error("line {line}: component {index} is not finite")]
    NonFiniteComponent { line: usize, index: usize },
    #[error("invalid token {0:?}")]
    InvalidToken(String),
}

/// Bookkeeping collected while loading a table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// `(vocab, dim)` from a word2vec header, if one was present.
    pub header: Option<(usize, usize)>,
    /// Lines whose token had already been seen; the first occurrence is kept.
    pub duplicates: usize,
}

/// Immutable token → vector map with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    name: String,
    dim: usize,
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
    stats: LoadStats,
}

impl EmbeddingTable {
    /// Builds a table from in-memory entries. Duplicate tokens keep the first vector.
    pub fn from_entries<I, S>(name: &str, dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut builder = Builder::new(name, dim);
        for (i, (token, vector)) in entries.into_iter().enumerate() {
            let token = token.into();
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(EmbeddingError::InvalidToken(token));
            }
            if vector.len() != dim {
                return Err(EmbeddingError::DimMismatch { line: i + 1, expected: dim, found: vector.len() });
            }
            if let Some(index) = vector.iter().position(|c| !c.is_finite()) {
                return Err(EmbeddingError::NonFiniteComponent { line: i + 1, index });
            }
            builder.insert(token, &vector);
        }
        builder.finish()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn stats(&self) -> &LoadStats {
        &self.stats
    }

    /// The vector for `token`, or `None` when it is out of vocabulary.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Entries in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.tokens.iter().enumerate().map(move |(i, t)| (t.as_str(), self.row(i)))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Writes the table in word2vec text format, with or without the `V D` header.
    ///
    /// Components use the shortest representation that parses back to the same
    /// `f64`, so loading the output reproduces the table exactly.
    pub fn write_text<W: fmt::Write>(&self, out: &mut W, header: bool) -> fmt::Result {
        if header {
            writeln!(out, "{} {}", self.len(), self.dim)?;
        }
        for (token, vector) in self.iter() {
            out.write_str(token)?;
            for c in vector {
                write!(out, " {c}")?;
            }
            out.write_char('\n')?;
        }
        Ok(())
    }
}

struct Builder {
    name: String,
    dim: usize,
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
    stats: LoadStats,
}

impl Builder {
    fn new(name: &str, dim: usize) -> Self {
        Builder {
            name: name.to_string(),
            dim,
            tokens: Vec::new(),
            index: BTreeMap::new(),
            data: Vec::new(),
            stats: LoadStats::default(),
        }
    }

    fn insert(&mut self, token: String, vector: &[f64]) {
        if self.index.contains_key(&token) {
            self.stats.duplicates += 1;
            return;
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
    }

    fn finish(self) -> Result<EmbeddingTable, EmbeddingError> {
        if self.tokens.is_empty() {
            return Err(EmbeddingError::EmptyTable);
        }
        Ok(EmbeddingTable {
            name: self.name,
            dim: self.dim,
            tokens: self.tokens,
            index: self.index,
            data: self.data,
            stats: self.stats,
        })
    }
}

/// Incremental parser fed one line at a time, so callers can stream large files.
pub struct TableLoader {
    name: String,
    expected_dim: Option<usize>,
    line_no: usize,
    /// First line, held back while deciding whether it is a header.
    candidate_header: Option<(usize, String)>,
    header_decided: bool,
    builder: Option<Builder>,
    header: Option<(usize, usize)>,
    scratch: Vec<f64>,
}

impl TableLoader {
    pub fn new(name: &str, expected_dim: Option<usize>) -> Self {
        TableLoader {
            name: name.to_string(),
            expected_dim,
            line_no: 0,
            candidate_header: None,
            header_decided: false,
            builder: None,
            header: None,
            scratch: Vec::new(),
        }
    }

    pub fn push_line(&mut self, line: &str) -> Result<(), EmbeddingError> {
        self.line_no += 1;
        if line.trim().is_empty() {
            return Ok(());
        }
        if !self.header_decided {
            if self.candidate_header.is_none() {
                if parse_header(line).is_some() {
                    self.candidate_header = Some((self.line_no, line.to_string()));
                    return Ok(());
                }
                self.header_decided = true;
            } else {
                let (first_no, first) = self.candidate_header.take().unwrap_or_default();
                self.header_decided = true;
                let (vocab, dim) = parse_header(&first).unwrap_or_default();
                let width = line.split_whitespace().count().saturating_sub(1);
                if width == dim {
                    self.header = Some((vocab, dim));
                    if let Some(expected) = self.expected_dim {
                        if expected != dim {
                            return Err(EmbeddingError::DimMismatch { line: first_no, expected, found: dim });
                        }
                    }
                } else {
                    self.parse_vector_line(first_no, &first)?;
                }
            }
        }
        let line_no = self.line_no;
        self.parse_vector_line(line_no, line)
    }

    fn parse_vector_line(&mut self, line_no: usize, line: &str) -> Result<(), EmbeddingError> {
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or_else(|| EmbeddingError::MalformedLine {
            line: line_no,
            reason: "empty line".to_string(),
        })?;
        self.scratch.clear();
        for (index, field) in fields.enumerate() {
            let value: f64 = field.parse().map_err(|_| EmbeddingError::MalformedLine {
                line: line_no,
                reason: alloc::format!("component {index} is not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(EmbeddingError::NonFiniteComponent { line: line_no, index });
            }
            self.scratch.push(value);
        }
        let found = self.scratch.len();
        if found == 0 {
            return Err(EmbeddingError::MalformedLine {
                line: line_no,
                reason: alloc::format!("token {token:?} has no components"),
            });
        }
        let builder = match &mut self.builder {
            Some(b) => b,
            None => {
                let expected = self.header.map(|(_, d)| d).or(self.expected_dim).unwrap_or(found);
                if found != expected {
                    return Err(EmbeddingError::DimMismatch { line: line_no, expected, found });
                }
                self.builder.insert(Builder::new(&self.name, found))
            }
        };
        if found != builder.dim {
            return Err(EmbeddingError::DimMismatch { line: line_no, expected: builder.dim, found });
        }
        builder.insert(token.to_string(), &self.scratch);
        Ok(())
    }

    pub fn finish(mut self) -> Result<EmbeddingTable, EmbeddingError> {
        if let Some((_, first)) = self.candidate_header.take() {
            // A lone `V D` line: treat it as a header with no entries.
            self.header = parse_header(&first);
        }
        let mut builder = self.builder.ok_or(EmbeddingError::EmptyTable)?;
        builder.stats.header = self.header;
        builder.finish()
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut fields = line.split_whitespace();
    let vocab: usize = fields.next()?.parse().ok()?;
    let dim: usize = fields.next()?.parse().ok()?;
    if fields.next().is_some() || vocab == 0 || dim == 0 {
        return None;
    }
    Some((vocab, dim))
}

/// Parses a whole word2vec or GloVe text file held in memory.
pub fn parse_table(name: &str, text: &str, expected_dim: Option<usize>) -> Result<EmbeddingTable, EmbeddingError> {
    let mut loader = TableLoader::new(name, expected_dim);
    for line in text.lines() {
        loader.push_line(line)?;
    }
    loader.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn word2vec_with_header() {
        let t = parse_table("m", "2 3\na 1 0 0\nb 0 1 0\n", None).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.stats().header, Some((2, 3)));
        assert_eq!(t.lookup("a"), Some(&[1.0, 0.0, 0.0][..]));
        assert_eq!(t.lookup("b"), Some(&[0.0, 1.0, 0.0][..]));
        assert_eq!(t.lookup("zzz"), None);
    }

    #[test]
    fn inconsistent_dims_fail() {
        let err = parse_table("m", "a 1.0 2.0\nb 3.0 4.0 5.0\n", None).unwrap_err();
        assert_eq!(err, EmbeddingError::DimMismatch { line: 2, expected: 2, found: 3 });
    }

    #[test]
    fn glove_headerless() {
        let t = parse_table("g", "кошка 0.5 -1.5\nсобака 2 3\n", Some(2)).unwrap();
        assert_eq!(t.stats().header, None);
        assert_eq!(t.lookup("кошка"), Some(&[0.5, -1.5][..]));
    }

    #[test]
    fn numeric_two_field_first_line_is_vector_when_width_disagrees() {
        // "5 3" could be a header, but the next line has width 1, not 3.
        let t = parse_table("m", "5 3\n7 4\n", None).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lookup("5"), Some(&[3.0][..]));
        assert_eq!(t.stats().header, None);
    }

    #[test]
    fn numeric_header_kept_when_width_agrees() {
        let t = parse_table("m", "1 1\n7 4\n", None).unwrap();
        assert_eq!(t.stats().header, Some((1, 1)));
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup("1"), None);
    }

    #[test]
    fn expected_dim_mismatch() {
        assert!(matches!(
            parse_table("m", "a 1 2\n", Some(3)),
            Err(EmbeddingError::DimMismatch { line: 1, expected: 3, found: 2 })
        ));
        assert!(matches!(
            parse_table("m", "1 2\na 1 2\n", Some(3)),
            Err(EmbeddingError::DimMismatch { line: 1, expected: 3, found: 2 })
        ));
    }

    #[test]
    fn malformed_and_non_finite() {
        assert!(matches!(parse_table("m", "a 1 x\n", None), Err(EmbeddingError::MalformedLine { line: 1, .. })));
        assert!(matches!(parse_table("m", "a\n", None), Err(EmbeddingError::MalformedLine { line: 1, .. })));
        assert_eq!(
            parse_table("m", "a 1 2\nb 1 NaN\n", None),
            Err(EmbeddingError::NonFiniteComponent { line: 2, index: 1 })
        );
        assert_eq!(parse_table("m", "a inf\n", None), Err(EmbeddingError::NonFiniteComponent { line: 1, index: 0 }));
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(parse_table("m", "", None), Err(EmbeddingError::EmptyTable));
        assert_eq!(parse_table("m", "\n\n", None), Err(EmbeddingError::EmptyTable));
        assert_eq!(parse_table("m", "3 100\n", None), Err(EmbeddingError::EmptyTable));
    }

    #[test]
    fn duplicates_keep_first() {
        let t = parse_table("m", "a 1 1\nb 2 2\na 3 3\na 4 4\n", None).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.stats().duplicates, 2);
        assert_eq!(t.lookup("a"), Some(&[1.0, 1.0][..]));
    }

    #[test]
    fn crlf_and_blank_lines() {
        let t = parse_table("m", "a 1 2\r\n\r\nb 3 4\r\n", None).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn from_entries_validates() {
        assert!(matches!(
            EmbeddingTable::from_entries("m", 2, [("a b", vec![1.0, 2.0])]),
            Err(EmbeddingError::InvalidToken(_))
        ));
        assert!(matches!(
            EmbeddingTable::from_entries("m", 2, [("a", vec![1.0])]),
            Err(EmbeddingError::DimMismatch { .. })
        ));
    }

    fn table_strategy() -> impl Strategy<Value = Vec<(String, Vec<f64>)>> {
        (1usize..6).prop_flat_map(|dim| {
            prop::collection::vec(
                ("[a-zа-я]{1,8}", prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, dim)),
                1..20,
            )
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(entries in table_strategy(), header in any::<bool>()) {
            let dim = entries[0].1.len();
            let table = EmbeddingTable::from_entries("m", dim, entries).unwrap();
            let mut text = String::new();
            table.write_text(&mut text, header).unwrap();
            let back = parse_table("m", &text, Some(dim)).unwrap();
            prop_assert_eq!(back.dim(), table.dim());
            prop_assert_eq!(back.len(), table.len());
            for ((ta, va), (tb, vb)) in table.iter().zip(back.iter()) {
                prop_assert_eq!(ta, tb);
                prop_assert_eq!(va, vb);
            }
        }
    }
}
