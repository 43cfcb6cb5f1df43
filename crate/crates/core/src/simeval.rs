//! Word-similarity evaluation of an embedding table against gold judgments.
//!
//! Pairs with an out-of-vocabulary word are dropped before any vector is read.
//! Graded datasets are scored with Spearman's rho and binary datasets with
//! average precision. Both use cosine *similarity* as the system score, so a
//! rho computed on cosine distance would have the opposite sign.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::embeddings::EmbeddingTable;
use crate::metrics::{self, MetricError};
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JudgmentKind {
    /// Real-valued scores, evaluated with Spearman's rho.
    Graded,
    /// 0/1 relatedness labels, evaluated with average precision.
    Binary,
}

impl JudgmentKind {
    pub fn metric(self) -> MetricKind {
        match self {
            JudgmentKind::Graded => MetricKind::Spearman,
            JudgmentKind::Binary => MetricKind::AveragePrecision,
        }
    }
}

impl core::str::FromStr for JudgmentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "graded" => Ok(JudgmentKind::Graded),
            "binary" => Ok(JudgmentKind::Binary),
            other => Err(alloc::format!("unknown judgment kind {other:?} (expected graded or binary)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Spearman,
    AveragePrecision,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Spearman => "spearman",
            MetricKind::AveragePrecision => "ap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimEvalError {
    #[error("judgment set is empty")]
    EmptySet,
    #[error("pair {index}: {reason}")]
    InvalidPair { index: usize, reason: &'static str },
    #[error("every pair contains an out-of-vocabulary word")]
    AllPairsDropped,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

/// A named gold dataset of word pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WordJudgmentSet {
    name: String,
    kind: JudgmentKind,
    pairs: Vec<WordPair>,
}

impl WordJudgmentSet {
    pub fn new(name: &str, kind: JudgmentKind, pairs: Vec<WordPair>) -> Result<Self, SimEvalError> {
        if pairs.is_empty() {
            return Err(SimEvalError::EmptySet);
        }
        for (index, p) in pairs.iter().enumerate() {
            if p.word1.is_empty() || p.word2.is_empty() {
                return Err(SimEvalError::InvalidPair { index, reason: "empty word" });
            }
            if !p.gold.is_finite() {
                return Err(SimEvalError::InvalidPair { index, reason: "gold score is not finite" });
            }
            if kind == JudgmentKind::Binary && p.gold != 0.0 && p.gold != 1.0 {
                return Err(SimEvalError::InvalidPair { index, reason: "binary gold must be 0 or 1" });
            }
        }
        Ok(WordJudgmentSet { name: name.to_string(), kind, pairs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> JudgmentKind {
        self.kind
    }

    pub fn pairs(&self) -> &[WordPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// One (model, dataset) cell of the similarity table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvalReport {
    pub model: String,
    pub dataset: String,
    pub metric: MetricKind,
    pub value: f64,
    pub pairs_total: usize,
    pub pairs_dropped: usize,
}

impl SimEvalReport {
    pub fn pairs_used(&self) -> usize {
        self.pairs_total - self.pairs_dropped
    }

    pub fn drop_fraction(&self) -> f64 {
        self.pairs_dropped as f64 / self.pairs_total as f64
    }
}

pub fn evaluate_similarity(table: &EmbeddingTable, gold: &WordJudgmentSet) -> Result<SimEvalReport, SimEvalError> {
    if gold.is_empty() {
        return Err(SimEvalError::EmptySet);
    }
    let mut system = Vec::with_capacity(gold.len());
    let mut truth = Vec::with_capacity(gold.len());
    for pair in gold.pairs() {
        let (Some(u), Some(v)) = (table.lookup(&pair.word1), table.lookup(&pair.word2)) else {
            continue;
        };
        // Same table, same dimension.
        let sim = vector::cosine_similarity(u, v).unwrap_or(0.0);
        system.push(sim);
        truth.push(pair.gold);
    }
    if system.is_empty() {
        return Err(SimEvalError::AllPairsDropped);
    }
    let metric = gold.kind().metric();
    let value = match metric {
        MetricKind::Spearman => metrics::spearman_rho(&system, &truth)?,
        MetricKind::AveragePrecision => {
            let labels: Vec<bool> = truth.iter().map(|&g| g == 1.0).collect();
            metrics::average_precision(&system, &labels)?
        }
    };
    Ok(SimEvalReport {
        model: table.name().to_string(),
        dataset: gold.name().to_string(),
        metric,
        value,
        pairs_total: gold.len(),
        pairs_dropped: gold.len() - system.len(),
    })
}
