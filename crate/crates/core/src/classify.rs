//! Cosine-distance KNN, stratified k-fold cross-validation and learning curves.
//!
//! Everything random (fold assignment, the training-set order used for
//! learning curves) is drawn up front from one seeded ChaCha stream when the
//! [`FoldPlan`] is built. Folds can then be evaluated in any order, or in
//! parallel, without changing the result.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metrics::{f1_score, ConfusionCounts};
use crate::vector::{cosine_with_norms, norm, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("need at least {needed} training points, have {available}")]
    TooFewTrainingPoints { needed: usize, available: usize },
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("too few instances: {0}")]
    TooFewInstances(&'static str),
    #[error("labels contain a single class")]
    SingleClassData,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Brute-force KNN over borrowed training rows.
#[derive(Debug, Clone)]
pub struct KnnModel<'a> {
    k: usize,
    rows: Vec<&'a [f64]>,
    norms: Vec<f64>,
    labels: Vec<bool>,
    dim: usize,
}

impl<'a> KnnModel<'a> {
    pub fn new(rows: Vec<&'a [f64]>, labels: Vec<bool>, k: usize) -> Result<Self, ClassifyError> {
        if k == 0 {
            return Err(ClassifyError::InvalidConfig("k must be positive"));
        }
        if rows.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch { features: rows.len(), labels: labels.len() });
        }
        if rows.len() < k {
            return Err(ClassifyError::TooFewTrainingPoints { needed: k, available: rows.len() });
        }
        let dim = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(ClassifyError::DimMismatch { expected: dim, found: r.len() });
        }
        let norms = rows.iter().map(|r| norm(r)).collect();
        Ok(KnnModel { k, rows, norms, labels, dim })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Indices of the `k` nearest rows by cosine distance; equal distances
    /// prefer the lower training index. Returned in no particular order.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<usize>, ClassifyError> {
        if query.len() != self.dim {
            return Err(ClassifyError::DimMismatch { expected: self.dim, found: query.len() });
        }
        let qn = norm(query);
        let mut scored: Vec<(f64, usize)> = self
            .rows
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (r, &rn))| (1.0 - cosine_with_norms(r, query, rn, qn), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, by_distance);
            scored.truncate(self.k);
        }
        Ok(scored.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority label of the `k` nearest neighbours; an even split goes to `true`.
    pub fn predict(&self, query: &[f64]) -> Result<bool, ClassifyError> {
        let neighbors = self.neighbors(query)?;
        let positives = neighbors.iter().filter(|&&i| self.labels[i]).count();
        Ok(2 * positives >= neighbors.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvConfig {
    pub folds: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 10, k: 3, seed: crate::DEFAULT_SEED }
    }
}

/// Stratified fold assignment plus a shuffled order of each training split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    n: usize,
    /// Test indices of each fold, ascending.
    test: Vec<Vec<usize>>,
    /// Training indices of each fold in shuffled order, for learning-curve prefixes.
    train_order: Vec<Vec<usize>>,
}

impl FoldPlan {
    /// Shuffles all indices with the seed, then deals each class out
    /// round-robin over the folds. The negative class is dealt first and the
    /// positive class continues from the next fold, which keeps fold sizes
    /// within one of each other.
    pub fn stratified(labels: &[bool], folds: usize, seed: u64) -> Result<Self, ClassifyError> {
        if folds < 2 {
            return Err(ClassifyError::InvalidConfig("at least two folds are required"));
        }
        let n = labels.len();
        if n < folds {
            return Err(ClassifyError::TooFewInstances("fewer instances than folds"));
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(ClassifyError::SingleClassData);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);

        let mut assignment = alloc::vec![0usize; n];
        let mut next = 0;
        for class in [false, true] {
            for &i in perm.iter().filter(|&&i| labels[i] == class) {
                assignment[i] = next;
                next = (next + 1) % folds;
            }
        }
        let mut test = alloc::vec![Vec::new(); folds];
        for (i, &f) in assignment.iter().enumerate() {
            test[f].push(i);
        }
        let train_order = (0..folds)
            .map(|f| {
                let mut train: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
                train.shuffle(&mut rng);
                train
            })
            .collect();
        Ok(FoldPlan { n, test, train_order })
    }

    pub fn folds(&self) -> usize {
        self.test.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.test[fold]
    }

    /// Training indices of `fold` when keeping `fraction` of the split.
    ///
    /// The first `ceil(fraction * |train|)` entries of the shuffled training
    /// order are kept and returned in ascending index order, so fraction 1.0
    /// gives exactly the plain cross-validation training set.
    pub fn train_indices(&self, fold: usize, fraction: f64) -> Vec<usize> {
        let order = &self.train_order[fold];
        let m = train_size(order.len(), fraction);
        let mut kept = order[..m].to_vec();
        kept.sort_unstable();
        kept
    }
}

/// `ceil(fraction * len)`, tolerant of representation error such as 0.3 * 10.
pub fn train_size(len: usize, fraction: f64) -> usize {
    let raw = fraction * len as f64;
    let m = libm::ceil(raw - 1e-9 * raw.max(1.0)) as usize;
    m.clamp(0, len)
}

/// Per-fold outcome of cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_f1: Vec<f64>,
    pub fold_counts: Vec<ConfusionCounts>,
    pub mean_f1: f64,
    /// Population standard deviation of the fold F1 values.
    pub std_f1: f64,
}

impl CvResult {
    pub fn from_counts(fold_counts: Vec<ConfusionCounts>) -> Self {
        let fold_f1: Vec<f64> = fold_counts.iter().map(f1_score).collect();
        let (mean_f1, std_f1) = mean_std(&fold_f1);
        CvResult { fold_f1, fold_counts, mean_f1, std_f1 }
    }

    pub fn folds(&self) -> usize {
        self.fold_f1.len()
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub fraction: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

pub(crate) fn check_inputs<R: AsRef<[f64]>>(features: &[R], labels: &[bool]) -> Result<(), ClassifyError> {
    if features.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch { features: features.len(), labels: labels.len() });
    }
    if let Some(first) = features.first() {
        let dim = first.as_ref().len();
        if let Some(r) = features.iter().find(|r| r.as_ref().len() != dim) {
            return Err(ClassifyError::DimMismatch { expected: dim, found: r.as_ref().len() });
        }
    }
    Ok(())
}

/// Checks the fractions are in (0, 1] and strictly increasing.
pub fn check_fractions(fractions: &[f64]) -> Result<(), ClassifyError> {
    if fractions.is_empty() {
        return Err(ClassifyError::InvalidConfig("no learning-curve fractions"));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(ClassifyError::InvalidConfig("fractions must lie in (0, 1]"));
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClassifyError::InvalidConfig("fractions must be strictly increasing"));
    }
    Ok(())
}

/// Checks that every fold, at the smallest fraction, leaves at least `k` training points.
pub fn check_plan(plan: &FoldPlan, k: usize, min_fraction: f64) -> Result<(), ClassifyError> {
    for f in 0..plan.folds() {
        let available = train_size(plan.train_order[f].len(), min_fraction);
        if available < k {
            return Err(ClassifyError::TooFewTrainingPoints { needed: k, available });
        }
    }
    Ok(())
}

/// Fits KNN on `train` and scores it on `test`.
pub fn evaluate_split<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[bool],
    train: &[usize],
    test: &[usize],
    k: usize,
) -> Result<ConfusionCounts, ClassifyError> {
    let rows = train.iter().map(|&i| features[i].as_ref()).collect();
    let train_labels = train.iter().map(|&i| labels[i]).collect();
    let model = KnnModel::new(rows, train_labels, k)?;
    let mut counts = ConfusionCounts::default();
    for &i in test {
        counts.record(labels[i], model.predict(features[i].as_ref())?);
    }
    Ok(counts)
}

/// Evaluates one fold of `plan` at a training fraction.
pub fn evaluate_fold<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[bool],
    plan: &FoldPlan,
    fold: usize,
    fraction: f64,
    k: usize,
) -> Result<ConfusionCounts, ClassifyError> {
    evaluate_split(features, labels, &plan.train_indices(fold, fraction), plan.test_indices(fold), k)
}

/// Stratified k-fold cross-validation of a cosine KNN, scored by F1.
pub fn cross_validate<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[bool],
    config: &CvConfig,
) -> Result<CvResult, ClassifyError> {
    check_inputs(features, labels)?;
    let plan = FoldPlan::stratified(labels, config.folds, config.seed)?;
    check_plan(&plan, config.k, 1.0)?;
    let counts = (0..plan.folds())
        .map(|f| evaluate_fold(features, labels, &plan, f, 1.0, config.k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CvResult::from_counts(counts))
}

/// F1 under cross-validation as the training split grows.
///
/// For each fraction, every fold trains on a prefix of its shuffled training
/// split and is tested on the full held-out fold.
pub fn learning_curve<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[bool],
    fractions: &[f64],
    config: &CvConfig,
) -> Result<LearningCurve, ClassifyError> {
    check_inputs(features, labels)?;
    check_fractions(fractions)?;
    let plan = FoldPlan::stratified(labels, config.folds, config.seed)?;
    check_plan(&plan, config.k, fractions[0])?;
    let points = fractions
        .iter()
        .map(|&fraction| {
            let counts = (0..plan.folds())
                .map(|f| evaluate_fold(features, labels, &plan, f, fraction, config.k))
                .collect::<Result<Vec<_>, _>>()?;
            let cv = CvResult::from_counts(counts);
            Ok(CurvePoint { fraction, mean_f1: cv.mean_f1, std_f1: cv.std_f1 })
        })
        .collect::<Result<_, ClassifyError>>()?;
    Ok(LearningCurve { points })
}

/// Convenience for owned feature matrices.
pub fn as_rows(features: &[Vector]) -> Vec<&[f64]> {
    features.iter().map(Vector::as_slice).collect()
}
