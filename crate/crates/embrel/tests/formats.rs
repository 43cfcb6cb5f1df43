use std::io::{BufRead, Read};

use embrel::formats::{read_embeddings, read_judgments, read_pairs, write_embeddings, write_pairs};
use embrel::Error;
use embrel_core::dataset::PostPairRecord;
use embrel_core::JudgmentKind;
use proptest::prelude::*;

#[test]
fn judgments_match_line_count() {
    let rows = ["word1,word2,sim", "кот,собака,0.8", "\"стол\",стул,3", "машина,дорога,1.25", "", "мир,война,0"];
    let text = rows.join("\n");
    let data_lines = rows.iter().skip(1).filter(|l| !l.is_empty()).count();
    let set = read_judgments("HJ", text.as_bytes(), JudgmentKind::Graded).unwrap();
    assert_eq!(set.len(), data_lines);
    assert_eq!(set.pairs()[1].word1, "стол");
}

#[test]
fn binary_judgments_reject_fractional_scores() {
    let text = "word1,word2,sim\na,b,1\nc,d,0.5\n";
    let err = read_judgments("RT", text.as_bytes(), JudgmentKind::Binary).unwrap_err();
    assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err}");
}

#[test]
fn pairs_keep_quoted_newlines() {
    let text = "post,op_post,is_related\n\"line one\nline two, with comma\",\"op \"\"quoted\"\"\",1\n";
    let records = read_pairs("2sr", text.as_bytes()).unwrap();
    assert_eq!(records[0].post, "line one\nline two, with comma");
    assert_eq!(records[0].op_post, "op \"quoted\"");
    assert!(records[0].is_related);
}

#[test]
fn pairs_reject_bad_labels() {
    let text = "post,op_post,is_related\na,b,yes\n";
    assert!(matches!(read_pairs("2sr", text.as_bytes()), Err(Error::BadLabel { .. })));
    assert!(matches!(read_pairs("2sr", "post,op_post,is_related\n".as_bytes()), Err(Error::EmptyInput { .. })));
    assert!(read_pairs("2sr", "post,is_related\na,1\n".as_bytes()).is_err());
}

#[test]
fn embeddings_round_trip_through_files() {
    let text = "3 2\nкот 0.5 -1\nпёс 1e-3 2\nдом 0 0\n";
    let table = read_embeddings("m", text.as_bytes(), Some(2)).unwrap();
    let mut out = Vec::new();
    write_embeddings(&table, &mut out, true).unwrap();
    let again = read_embeddings("m", out.as_slice(), None).unwrap();
    assert_eq!(again.len(), 3);
    assert_eq!(again.lookup("пёс"), Some(&[1e-3, 2.0][..]));
    assert!(read_embeddings("m", "a 1 2\nb 1\n".as_bytes(), None).is_err());
}

/// Synthetic word2vec text generated line by line.
struct SyntheticTable {
    words: usize,
    dim: usize,
    next: usize,
    buf: Vec<u8>,
    pos: usize,
}

impl SyntheticTable {
    fn new(words: usize, dim: usize) -> Self {
        SyntheticTable { words, dim, next: 0, buf: format!("{words} {dim}\n").into_bytes(), pos: 0 }
    }

    fn refill(&mut self) {
        self.buf.clear();
        self.pos = 0;
        let start = self.next;
        while self.next < self.words && self.next - start < 256 {
            let i = self.next;
            self.buf.extend_from_slice(format!("tok{i}").as_bytes());
            for j in 0..self.dim {
                let v = ((i * 31 + j * 7) % 1000) as f64 / 500.0 - 1.0;
                self.buf.extend_from_slice(format!(" {v}").as_bytes());
            }
            self.buf.push(b'\n');
            self.next += 1;
        }
    }
}

impl Read for SyntheticTable {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        let avail = self.fill_buf()?;
        let n = avail.len().min(out.len());
        out[..n].copy_from_slice(&avail[..n]);
        self.consume(n);
        Ok(n)
    }
}

impl BufRead for SyntheticTable {
    fn fill_buf(&mut self) -> std::io::Result<&[u8]> {
        if self.pos == self.buf.len() {
            self.refill();
        }
        Ok(&self.buf[self.pos..])
    }

    fn consume(&mut self, n: usize) {
        self.pos += n;
    }
}

#[test]
fn loads_corpus_scale_vocabulary() {
    let table = read_embeddings("big", SyntheticTable::new(614_707, 100), Some(100)).unwrap();
    assert_eq!(table.len(), 614_707);
    assert_eq!(table.dim(), 100);
    assert_eq!(table.stats().header, Some((614_707, 100)));
    let expected: Vec<f64> = (0..100).map(|j| ((614_706 * 31 + j * 7) % 1000) as f64 / 500.0 - 1.0).collect();
    assert_eq!(table.lookup("tok614706"), Some(expected.as_slice()));
}

fn field() -> impl Strategy<Value = String> {
    // commas, quotes, newlines and Cyrillic all need to survive quoting
    "[a-zа-я ,\"\n]{0,12}[a-zа-я]".prop_map(String::from)
}

proptest! {
    #[test]
    fn pairs_round_trip(rows in prop::collection::vec((field(), field(), any::<bool>()), 1..20)) {
        let records: Vec<PostPairRecord> = rows
            .into_iter()
            .map(|(post, op_post, is_related)| PostPairRecord { post, op_post, is_related })
            .collect();
        let mut buf = Vec::new();
        write_pairs(&records, &mut buf).unwrap();
        prop_assert_eq!(read_pairs("rt", buf.as_slice()).unwrap(), records);
    }
}
