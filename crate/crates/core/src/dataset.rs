//! Post-pair records and majority-vote aggregation of raw annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Length cap of posts in the reference dataset. Longer posts are counted, not rejected.
pub const MAX_POST_CHARS: usize = 216;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("record {index}: {field} is empty")]
    EmptyField { index: usize, field: &'static str },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("pair {pair_id}: {count} annotations, majority needs an odd count")]
    EvenAnnotatorCount { pair_id: String, count: usize },
    #[error("pair {pair_id}: annotator {annotator_id} labelled it more than once")]
    DuplicateAnnotation { pair_id: String, annotator_id: String },
}

/// `(post, op_post, is_related)` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostPairRecord {
    pub post: String,
    pub op_post: String,
    pub is_related: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub records: usize,
    pub related: usize,
    pub unrelated: usize,
    /// Records whose opening post already appeared in an earlier record.
    pub duplicate_op_posts: usize,
    /// Records whose post is longer than [`MAX_POST_CHARS`].
    pub over_length_posts: usize,
}

impl DatasetSummary {
    pub fn related_fraction(&self) -> f64 {
        self.related as f64 / self.records as f64
    }
}

/// Validates records and summarises label balance and duplication.
pub fn summarize(records: &[PostPairRecord]) -> Result<DatasetSummary, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut seen_op: BTreeSet<&str> = BTreeSet::new();
    let mut summary = DatasetSummary {
        records: records.len(),
        related: 0,
        unrelated: 0,
        duplicate_op_posts: 0,
        over_length_posts: 0,
    };
    for (index, r) in records.iter().enumerate() {
        if r.post.trim().is_empty() {
            return Err(DatasetError::EmptyField { index, field: "post" });
        }
        if r.op_post.trim().is_empty() {
            return Err(DatasetError::EmptyField { index, field: "op_post" });
        }
        if r.is_related {
            summary.related += 1;
        } else {
            summary.unrelated += 1;
        }
        if !seen_op.insert(r.op_post.as_str()) {
            summary.duplicate_op_posts += 1;
        }
        if r.post.chars().count() > MAX_POST_CHARS {
            summary.over_length_posts += 1;
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub pair_id: String,
    pub annotator_id: String,
    pub label: bool,
}

/// Strict majority of an odd number of binary labels.
pub fn majority_vote(labels: &[bool]) -> Option<bool> {
    if labels.len().is_multiple_of(2) {
        return None;
    }
    let positives = labels.iter().filter(|&&l| l).count();
    Some(2 * positives > labels.len())
}

struct Grouped<'a> {
    order: Vec<&'a str>,
    labels: BTreeMap<&'a str, BTreeMap<&'a str, bool>>,
}

fn group(annotations: &[AnnotationRecord]) -> Result<Grouped<'_>, DatasetError> {
    let mut order = Vec::new();
    let mut labels: BTreeMap<&str, BTreeMap<&str, bool>> = BTreeMap::new();
    for a in annotations {
        let per_pair = labels.entry(a.pair_id.as_str()).or_insert_with(|| {
            order.push(a.pair_id.as_str());
            BTreeMap::new()
        });
        if per_pair.insert(a.annotator_id.as_str(), a.label).is_some() {
            return Err(DatasetError::DuplicateAnnotation {
                pair_id: a.pair_id.clone(),
                annotator_id: a.annotator_id.clone(),
            });
        }
    }
    Ok(Grouped { order, labels })
}

/// Final label per pair, in order of each pair's first annotation.
pub fn majority_labels(annotations: &[AnnotationRecord]) -> Result<Vec<(String, bool)>, DatasetError> {
    if annotations.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let grouped = group(annotations)?;
    grouped
        .order
        .iter()
        .map(|&pair| {
            let votes: Vec<bool> = grouped.labels[pair].values().copied().collect();
            majority_vote(&votes)
                .map(|l| (String::from(pair), l))
                .ok_or_else(|| DatasetError::EvenAnnotatorCount { pair_id: String::from(pair), count: votes.len() })
        })
        .collect()
}

/// Raw (not chance-corrected) agreement between annotators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementStats {
    pub pairs: usize,
    pub annotators: usize,
    /// Fraction of pairs on which every annotator gave the same label.
    pub unanimity: f64,
    /// Over every pair and every two annotators who both labelled it, the
    /// fraction of such comparisons that agree.
    pub pairwise_agreement: f64,
}

pub fn agreement_stats(annotations: &[AnnotationRecord]) -> Result<AgreementStats, DatasetError> {
    let grouped = group(annotations)?;
    let annotators: BTreeSet<&str> = annotations.iter().map(|a| a.annotator_id.as_str()).collect();
    let mut unanimous = 0usize;
    let mut comparisons = 0usize;
    let mut agreeing = 0usize;
    for labels in grouped.labels.values() {
        let pos = labels.values().filter(|&&l| l).count();
        let neg = labels.len() - pos;
        if pos == 0 || neg == 0 {
            unanimous += 1;
        }
        comparisons += labels.len() * (labels.len() - 1) / 2;
        agreeing += pos * pos.saturating_sub(1) / 2 + neg * neg.saturating_sub(1) / 2;
    }
    let pairs = grouped.labels.len();
    Ok(AgreementStats {
        pairs,
        annotators: annotators.len(),
        unanimity: if pairs == 0 { 0.0 } else { unanimous as f64 / pairs as f64 },
        pairwise_agreement: if comparisons == 0 { 0.0 } else { agreeing as f64 / comparisons as f64 },
    })
}
