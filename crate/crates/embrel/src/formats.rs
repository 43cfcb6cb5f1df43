//! Readers and writers for every on-disk format the tools use.
//!
//! * embeddings: word2vec text (optional `V D` header) or headerless GloVe text
//! * gold word pairs: CSV with `word1,word2,sim` columns
//! * post pairs: RFC 4180 CSV with `post,op_post,is_related` columns
//! * raw annotations: CSV with `pair_id,annotator_id,label` columns
//! * lemma dictionary: `surface<TAB>lemma` TSV
//! * PCA model: plain text, see [`PcaModel::to_text`]

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use embrel_core::compose::PcaModel;
use embrel_core::dataset::{AnnotationRecord, PostPairRecord};
use embrel_core::embeddings::{EmbeddingTable, TableLoader};
use embrel_core::simeval::{JudgmentKind, WordJudgmentSet, WordPair};
use embrel_core::textproc::LemmaMap;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Streams a word2vec / GloVe text table. `name` labels the model in reports.
pub fn read_embeddings<R: BufRead>(name: &str, mut reader: R, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let mut loader = TableLoader::new(name, expected_dim);
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        loader
            .push_line(line.trim_end_matches(['\n', '\r']))
            .map_err(|source| Error::Embedding { origin: name.to_string(), source })?;
    }
    let table = loader.finish().map_err(|source| Error::Embedding { origin: name.to_string(), source })?;
    if table.stats().duplicates > 0 {
        log::warn!("{name}: {} duplicate tokens ignored (first occurrence kept)", table.stats().duplicates);
    }
    if let Some((vocab, _)) = table.stats().header {
        if vocab != table.len() + table.stats().duplicates {
            log::warn!("{name}: header declares {vocab} words, file has {}", table.len() + table.stats().duplicates);
        }
    }
    Ok(table)
}

pub fn load_embeddings(name: &str, path: &Path, expected_dim: Option<usize>) -> Result<EmbeddingTable> {
    let reader = open(path)?;
    read_embeddings(name, reader, expected_dim).map_err(|e| match e {
        Error::Stream { source } => Error::io(path, source),
        Error::Embedding { source, .. } => Error::Embedding { origin: path.display().to_string(), source },
        other => other,
    })
}

/// Writes `table` in word2vec text format.
pub fn write_embeddings<W: Write>(table: &EmbeddingTable, out: W, header: bool) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    if header {
        writeln!(out, "{} {}", table.len(), table.dim())?;
    }
    for (token, vector) in table.iter() {
        out.write_all(token.as_bytes())?;
        for c in vector {
            write!(out, " {c}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader)
}

fn column(headers: &csv::StringRecord, name: &str, origin: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MalformedRow {
        origin: origin.to_string(),
        line: 1,
        reason: format!("missing column {name:?}"),
    })
}

fn csv_error(origin: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Stream { source },
        kind => Error::MalformedRow { origin: origin.to_string(), line, reason: format!("{kind:?}") },
    }
}

/// Reads gold word pairs from CSV with a `word1,word2,sim` header.
///
/// Binary sets require `sim` to be exactly 0 or 1.
pub fn read_judgments<R: Read>(name: &str, reader: R, kind: JudgmentKind) -> Result<WordJudgmentSet> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(name, e))?.clone();
    let (c1, c2, cs) = (column(&headers, "word1", name)?, column(&headers, "word2", name)?, column(&headers, "sim", name)?);
    let mut pairs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(name, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |reason: String| Error::MalformedRow { origin: name.to_string(), line, reason };
        let word1 = row[c1].trim().to_string();
        let word2 = row[c2].trim().to_string();
        if word1.is_empty() || word2.is_empty() {
            return Err(malformed("empty word".into()));
        }
        let gold: f64 = row[cs]
            .trim()
            .parse()
            .ok()
            .filter(|g: &f64| g.is_finite())
            .ok_or_else(|| malformed(format!("sim {:?} is not a finite number", &row[cs])))?;
        if kind == JudgmentKind::Binary && gold != 0.0 && gold != 1.0 {
            return Err(malformed(format!("binary set requires sim 0 or 1, got {:?}", &row[cs])));
        }
        pairs.push(WordPair { word1, word2, gold });
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput { origin: name.to_string() });
    }
    Ok(WordJudgmentSet::new(name, kind, pairs)?)
}

pub fn load_judgments(name: &str, path: &Path, kind: JudgmentKind) -> Result<WordJudgmentSet> {
    read_judgments(name, open(path)?, kind).map_err(|e| relabel(e, path))
}

fn relabel(e: Error, path: &Path) -> Error {
    let origin = path.display().to_string();
    match e {
        Error::Stream { source } => Error::io(path, source),
        Error::MalformedRow { line, reason, .. } => Error::MalformedRow { origin, line, reason },
        Error::BadLabel { line, value, .. } => Error::BadLabel { origin, line, value },
        Error::EmptyInput { .. } => Error::EmptyInput { origin },
        other => other,
    }
}

fn parse_label(value: &str) -> Option<bool> {
    match value.trim() {
        "1" => Some(true),
        "0" => Some(false),
        _ => None,
    }
}

/// Reads `post,op_post,is_related` records.
pub fn read_pairs<R: Read>(origin: &str, reader: R) -> Result<Vec<PostPairRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
    let (cp, co, cl) =
        (column(&headers, "post", origin)?, column(&headers, "op_post", origin)?, column(&headers, "is_related", origin)?);
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(origin, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let is_related = parse_label(&row[cl])
            .ok_or_else(|| Error::BadLabel { origin: origin.to_string(), line, value: row[cl].to_string() })?;
        for (c, field) in [(cp, "post"), (co, "op_post")] {
            if row[c].trim().is_empty() {
                return Err(Error::MalformedRow { origin: origin.to_string(), line, reason: format!("{field} is empty") });
            }
        }
        records.push(PostPairRecord { post: row[cp].to_string(), op_post: row[co].to_string(), is_related });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput { origin: origin.to_string() });
    }
    Ok(records)
}

pub fn load_pairs(path: &Path) -> Result<Vec<PostPairRecord>> {
    read_pairs(&path.display().to_string(), open(path)?).map_err(|e| relabel(e, path))
}

pub fn write_pairs<W: Write>(records: &[PostPairRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["post", "op_post", "is_related"]).map_err(|e| csv_error("output", e))?;
    for r in records {
        w.write_record([r.post.as_str(), r.op_post.as_str(), if r.is_related { "1" } else { "0" }])
            .map_err(|e| csv_error("output", e))?;
    }
    w.flush()?;
    Ok(())
}

/// `pair_id,is_related` rows for aggregated labels without post texts.
pub fn write_pair_labels<W: Write>(labels: &[(String, bool)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pair_id", "is_related"]).map_err(|e| csv_error("output", e))?;
    for (id, label) in labels {
        w.write_record([id.as_str(), if *label { "1" } else { "0" }]).map_err(|e| csv_error("output", e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `pair_id,annotator_id,label` rows.
pub fn read_annotations<R: Read>(origin: &str, reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
    let (cp, ca, cl) =
        (column(&headers, "pair_id", origin)?, column(&headers, "annotator_id", origin)?, column(&headers, "label", origin)?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(origin, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let label = parse_label(&row[cl])
            .ok_or_else(|| Error::BadLabel { origin: origin.to_string(), line, value: row[cl].to_string() })?;
        let (pair_id, annotator_id) = (row[cp].trim(), row[ca].trim());
        if pair_id.is_empty() || annotator_id.is_empty() {
            return Err(Error::MalformedRow { origin: origin.to_string(), line, reason: "empty id".into() });
        }
        out.push(AnnotationRecord { pair_id: pair_id.to_string(), annotator_id: annotator_id.to_string(), label });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput { origin: origin.to_string() });
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    read_annotations(&path.display().to_string(), open(path)?).map_err(|e| relabel(e, path))
}

/// Post texts keyed by pair id, from a `pair_id,post,op_post` CSV.
pub fn load_pair_texts(path: &Path) -> Result<Vec<(String, String, String)>> {
    let origin = path.display().to_string();
    let mut rdr = csv_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| relabel(csv_error(&origin, e), path))?.clone();
    let (ci, cp, co) =
        (column(&headers, "pair_id", &origin)?, column(&headers, "post", &origin)?, column(&headers, "op_post", &origin)?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| relabel(csv_error(&origin, e), path))?;
        out.push((row[ci].trim().to_string(), row[cp].to_string(), row[co].to_string()));
    }
    Ok(out)
}

/// Missing path → identity lemmatisation.
pub fn load_lemmas(path: Option<&Path>) -> Result<LemmaMap> {
    let Some(path) = path else {
        return Ok(LemmaMap::new());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LemmaMap::parse_tsv(&text).map_err(|source| Error::Lemma { origin: path.display().to_string(), source })
}

pub fn load_pca(path: &Path) -> Result<PcaModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(PcaModel::from_text(&text)?)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
