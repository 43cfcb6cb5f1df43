//! Rank correlation, average precision and F1.

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: need at least two items and a non-constant sequence")]
    DegenerateInput,
    #[error("no positive labels")]
    NoPositives,
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
}

/// Binary confusion matrix with "related" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            c.record(t, p);
        }
        c
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn f1(&self) -> f64 {
        f1_score(self)
    }
}

impl core::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tn: self.tn + o.tn }
    }
}

/// `2tp / (2tp + fp + fn)`, or 0 when nothing was predicted or present.
pub fn f1_score(c: &ConfusionCounts) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

/// Fractional 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap_or(Ordering::Equal));
    let mut ranks = alloc::vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, averaged
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn check_finite(xs: &[f64]) -> Result<(), MetricError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(MetricError::NonFiniteScore(i)),
        None => Ok(()),
    }
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricError::DegenerateInput);
    }
    check_finite(xs)?;
    check_finite(ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys)).ok_or(MetricError::DegenerateInput)
}

/// Non-interpolated average precision.
///
/// Items are ranked by score, highest first; equal scores keep input order.
/// The result is the mean of precision@i over the ranks i that hold a positive.
pub fn average_precision(scores: &[f64], gold: &[bool]) -> Result<f64, MetricError> {
    if scores.len() != gold.len() {
        return Err(MetricError::LengthMismatch(scores.len(), gold.len()));
    }
    check_finite(scores)?;
    let positives = gold.iter().filter(|&&g| g).count();
    if positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps the lower index first among equal scores
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if gold[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}
