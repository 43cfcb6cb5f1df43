//! Post vectors by mean pooling, and pair features built from two post vectors.
//!
//! A post is represented by the arithmetic mean of the embeddings of its
//! in-vocabulary tokens. A (post, opening post) pair then becomes:
//!
//! * `Sum`: the component-wise mean of the two post vectors (dimension d),
//! * `Con`: the two vectors concatenated (2d),
//! * `ConPca`: the concatenation projected onto its top d principal components (d).

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};
use core::str::FromStr;

use thiserror::Error;

use crate::embeddings::EmbeddingTable;
use crate::linalg;
use crate::vector::{dot, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("the con_pca strategy needs a fitted PCA model")]
    MissingPcaModel,
    #[error("PCA needs at least two rows, got {0}")]
    TooFewRows(usize),
    #[error("PCA output dimension {output} is invalid for input dimension {input}")]
    InvalidOutputDim { input: usize, output: usize },
    #[error("PCA model text, line {line}: {reason}")]
    MalformedModel { line: usize, reason: &'static str },
}

/// Mean-pooled post representation with OOV accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct PostVector {
    pub vector: Vector,
    pub used_tokens: usize,
    pub oov_tokens: usize,
}

impl PostVector {
    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    /// True when no token was found in the table.
    pub fn is_all_oov(&self) -> bool {
        self.used_tokens == 0
    }
}

/// Mean of the embeddings of the in-vocabulary tokens; OOV tokens are skipped.
///
/// Repeated tokens count once per occurrence. Vectors are summed in sorted
/// token order, so any permutation of `tokens` gives a bit-identical result.
/// With no known token the result is the zero vector.
pub fn embed_post<S: AsRef<str>>(table: &EmbeddingTable, tokens: &[S]) -> PostVector {
    let mut known: Vec<&str> = Vec::with_capacity(tokens.len());
    let mut oov_tokens = 0;
    for t in tokens {
        let t = t.as_ref();
        if table.contains(t) {
            known.push(t);
        } else {
            oov_tokens += 1;
        }
    }
    known.sort_unstable();
    let mut sum = alloc::vec![0.0; table.dim()];
    for t in &known {
        if let Some(v) = table.lookup(t) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
    }
    if !known.is_empty() {
        let n = known.len() as f64;
        for s in &mut sum {
            *s /= n;
        }
    }
    PostVector { vector: Vector::from_finite(sum), used_tokens: known.len(), oov_tokens }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompositionStrategy {
    Sum,
    #[default]
    Con,
    ConPca,
}

impl CompositionStrategy {
    pub const ALL: [CompositionStrategy; 3] = [CompositionStrategy::Sum, CompositionStrategy::Con, CompositionStrategy::ConPca];

    /// Feature dimension produced from post vectors of dimension `d`.
    pub fn output_dim(self, d: usize) -> usize {
        match self {
            CompositionStrategy::Sum | CompositionStrategy::ConPca => d,
            CompositionStrategy::Con => 2 * d,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionStrategy::Sum => "sum",
            CompositionStrategy::Con => "con",
            CompositionStrategy::ConPca => "con_pca",
        }
    }
}

impl fmt::Display for CompositionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompositionStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(CompositionStrategy::Sum),
            "con" => Ok(CompositionStrategy::Con),
            "con_pca" | "con+pca" | "conpca" => Ok(CompositionStrategy::ConPca),
            other => Err(alloc::format!("unknown strategy {other:?} (expected sum, con or con_pca)")),
        }
    }
}

/// Which post goes first in a concatenation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ConcatOrder {
    #[default]
    PostFirst,
    OpPostFirst,
}

pub fn concat(first: &[f64], second: &[f64]) -> Vector {
    let mut out = Vec::with_capacity(first.len() + second.len());
    out.extend_from_slice(first);
    out.extend_from_slice(second);
    Vector::from_finite(out)
}

/// Composes the pair feature for `(post, op_post)`.
///
/// `pca` must be present for `ConPca` and is ignored otherwise.
pub fn compose_pair(
    post: &PostVector,
    op_post: &PostVector,
    strategy: CompositionStrategy,
    pca: Option<&PcaModel>,
) -> Result<Vector, ComposeError> {
    let (p, q) = (post.vector.as_slice(), op_post.vector.as_slice());
    if p.len() != q.len() {
        return Err(ComposeError::DimMismatch { expected: p.len(), found: q.len() });
    }
    match strategy {
        CompositionStrategy::Sum => Ok(Vector::from_finite(p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect())),
        CompositionStrategy::Con => Ok(concat(p, q)),
        CompositionStrategy::ConPca => {
            let pca = pca.ok_or(ComposeError::MissingPcaModel)?;
            pca.project(&concat(p, q))
        }
    }
}

/// Mean vector plus orthonormal principal directions, largest variance first.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

const TIE_TOL: f64 = 1e-12;

/// Fits PCA on `rows` and keeps the top `output_dim` directions.
///
/// Covariance uses the `n - 1` normaliser, so the variance of the projected
/// training rows along component i equals eigenvalue i. Each component's sign is
/// chosen so that its largest-magnitude coordinate is positive. Components whose
/// eigenvalues tie are instead signed by their first nonzero coordinate and
/// ordered by descending lexicographic comparison. Zero eigenvalues are allowed.
pub fn fit_pca<R: AsRef<[f64]>>(rows: &[R], output_dim: usize) -> Result<PcaModel, ComposeError> {
    if rows.len() < 2 {
        return Err(ComposeError::TooFewRows(rows.len()));
    }
    let dim = rows[0].as_ref().len();
    if output_dim == 0 || output_dim > dim {
        return Err(ComposeError::InvalidOutputDim { input: dim, output: output_dim });
    }
    for r in rows {
        if r.as_ref().len() != dim {
            return Err(ComposeError::DimMismatch { expected: dim, found: r.as_ref().len() });
        }
    }
    let n = rows.len() as f64;
    let mut mean = alloc::vec![0.0; dim];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = alloc::vec![0.0; dim * dim];
    let mut centered = alloc::vec![0.0; dim];
    for r in rows {
        for ((c, x), m) in centered.iter_mut().zip(r.as_ref()).zip(&mean) {
            *c = x - m;
        }
        for i in 0..dim {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let row = &mut cov[i * dim..(i + 1) * dim];
            for j in i..dim {
                row[j] += ci * centered[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            cov[i * dim + j] /= n - 1.0;
        }
    }

    let eig = linalg::symmetric_eigen(&cov, dim);
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .values
        .into_iter()
        .map(|v| if v < 0.0 && v > -TIE_TOL * (1.0 + v.abs()) { 0.0 } else { v })
        .zip(eig.vectors)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let scale = pairs.first().map_or(1.0, |p| p.0.abs().max(1.0));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[start].0 - pairs[end].0).abs() <= TIE_TOL * scale {
            end += 1;
        }
        if end - start == 1 {
            orient_by_largest(&mut pairs[start].1);
        } else {
            for p in &mut pairs[start..end] {
                orient_by_first_nonzero(&mut p.1);
            }
            pairs[start..end].sort_by(|a, b| lex_cmp(&b.1, &a.1));
        }
        start = end;
    }

    pairs.truncate(output_dim);
    let (eigenvalues, components) = pairs.into_iter().unzip();
    Ok(PcaModel { mean, components, eigenvalues })
}

fn orient_by_largest(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn orient_by_first_nonzero(v: &mut [f64]) {
    if let Some(x) = v.iter().find(|x| x.abs() > TIE_TOL) {
        if *x < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `components · (x − mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Vector, ComposeError> {
        if x.len() != self.input_dim() {
            return Err(ComposeError::DimMismatch { expected: self.input_dim(), found: x.len() });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(Vector::from_finite(self.components.iter().map(|c| dot(c, &centered)).collect()))
    }

    /// `componentsᵀ · y`: maps projected coordinates back to the centered input space.
    pub fn back_project(&self, y: &[f64]) -> Result<Vec<f64>, ComposeError> {
        if y.len() != self.output_dim() {
            return Err(ComposeError::DimMismatch { expected: self.output_dim(), found: y.len() });
        }
        let mut out = alloc::vec![0.0; self.input_dim()];
        for (c, &w) in self.components.iter().zip(y) {
            for (o, x) in out.iter_mut().zip(c) {
                *o += w * x;
            }
        }
        Ok(out)
    }

    /// Text form: `input_dim output_dim`, the mean, the eigenvalues, then one
    /// line per component. Numbers use round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.input_dim(), self.output_dim());
        write_row(&mut s, &self.mean);
        write_row(&mut s, &self.eigenvalues);
        for c in &self.components {
            write_row(&mut s, c);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ComposeError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let malformed = |line: usize, reason| ComposeError::MalformedModel { line: line + 1, reason };
        let (ln, header) = lines.next().ok_or(malformed(0, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| malformed(ln, "header must be two integers")))
            .collect::<Result<_, _>>()?;
        let [input, output] = dims[..] else {
            return Err(malformed(ln, "header must be two integers"));
        };
        if output == 0 || output > input {
            return Err(ComposeError::InvalidOutputDim { input, output });
        }
        let mut read_row = |want: usize, what| -> Result<Vec<f64>, ComposeError> {
            let (ln, l) = lines.next().ok_or(ComposeError::MalformedModel { line: 0, reason: what })?;
            let row: Vec<f64> = l
                .split_whitespace()
                .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or(malformed(ln, "bad number")))
                .collect::<Result<_, _>>()?;
            if row.len() != want {
                return Err(malformed(ln, "wrong number of values"));
            }
            Ok(row)
        };
        let mean = read_row(input, "missing mean line")?;
        let eigenvalues = read_row(output, "missing eigenvalue line")?;
        let components = (0..output).map(|_| read_row(input, "missing component line")).collect::<Result<_, _>>()?;
        Ok(PcaModel { mean, components, eigenvalues })
    }
}

fn write_row(s: &mut String, row: &[f64]) {
    for (i, x) in row.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x}");
    }
    s.push('\n');
}
