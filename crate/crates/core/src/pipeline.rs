//! Relatedness pipeline glue: records → post vectors → pair features → CV.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::classify::{self, ClassifyError, CurvePoint, CvConfig, CvResult, FoldPlan, KnnModel, LearningCurve};
use crate::compose::{self, ComposeError, CompositionStrategy, ConcatOrder, PcaModel, PostVector};
use crate::dataset::PostPairRecord;
use crate::embeddings::EmbeddingTable;
use crate::metrics::ConfusionCounts;
use crate::textproc::{self, LemmaMap};
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Mean-pooled vectors for both sides of every record.
#[derive(Debug, Clone)]
pub struct EmbeddedPairs {
    pub posts: Vec<PostVector>,
    pub op_posts: Vec<PostVector>,
    pub labels: Vec<bool>,
    pub dim: usize,
}

impl EmbeddedPairs {
    pub fn from_records(table: &EmbeddingTable, records: &[PostPairRecord], lemmas: &LemmaMap) -> Self {
        let embed = |text: &str| compose::embed_post(table, &textproc::preprocess(text, lemmas));
        // opening posts repeat heavily; embed each distinct text once
        let mut op_cache: BTreeMap<&str, PostVector> = BTreeMap::new();
        let mut posts = Vec::with_capacity(records.len());
        let mut op_posts = Vec::with_capacity(records.len());
        for r in records {
            posts.push(embed(&r.post));
            let op = op_cache.entry(r.op_post.as_str()).or_insert_with(|| embed(&r.op_post));
            op_posts.push(op.clone());
        }
        EmbeddedPairs { posts, op_posts, labels: records.iter().map(|r| r.is_related).collect(), dim: table.dim() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of post vectors (either side) that pooled no known token.
    pub fn all_oov_posts(&self) -> usize {
        self.posts.iter().chain(&self.op_posts).filter(|p| p.is_all_oov()).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureOptions {
    pub strategy: CompositionStrategy,
    pub order: ConcatOrder,
    /// Refit PCA inside every training split instead of once on all rows.
    pub pca_per_fold: bool,
}

/// Feature matrix ready for cross-validation.
#[derive(Debug, Clone)]
pub enum PairFeatures {
    /// Features fixed before splitting. `pca` is the model used for `ConPca`.
    Fixed { rows: Vec<Vector>, pca: Option<PcaModel> },
    /// Concatenated rows; PCA is fitted per training split.
    PerFoldPca { concat: Vec<Vector>, output_dim: usize },
}

fn oriented<'a>(p: &'a PostVector, q: &'a PostVector, order: ConcatOrder) -> (&'a PostVector, &'a PostVector) {
    match order {
        ConcatOrder::PostFirst => (p, q),
        ConcatOrder::OpPostFirst => (q, p),
    }
}

pub fn build_features(pairs: &EmbeddedPairs, opts: &FeatureOptions) -> Result<PairFeatures, PipelineError> {
    let compose_all = |strategy, pca: Option<&PcaModel>| -> Result<Vec<Vector>, ComposeError> {
        pairs
            .posts
            .iter()
            .zip(&pairs.op_posts)
            .map(|(p, q)| {
                let (a, b) = oriented(p, q, opts.order);
                compose::compose_pair(a, b, strategy, pca)
            })
            .collect()
    };
    match opts.strategy {
        CompositionStrategy::Sum | CompositionStrategy::Con => {
            Ok(PairFeatures::Fixed { rows: compose_all(opts.strategy, None)?, pca: None })
        }
        CompositionStrategy::ConPca => {
            let concat = compose_all(CompositionStrategy::Con, None)?;
            if opts.pca_per_fold {
                return Ok(PairFeatures::PerFoldPca { concat, output_dim: pairs.dim });
            }
            let pca = compose::fit_pca(&concat, pairs.dim)?;
            let rows = concat.iter().map(|c| pca.project(c)).collect::<Result<Vec<_>, _>>()?;
            Ok(PairFeatures::Fixed { rows, pca: Some(pca) })
        }
    }
}

impl PairFeatures {
    pub fn len(&self) -> usize {
        match self {
            PairFeatures::Fixed { rows, .. } => rows.len(),
            PairFeatures::PerFoldPca { concat, .. } => concat.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension of the vectors the classifier sees.
    pub fn dim(&self) -> usize {
        match self {
            PairFeatures::Fixed { rows, .. } => rows.first().map_or(0, Vector::dim),
            PairFeatures::PerFoldPca { output_dim, .. } => *output_dim,
        }
    }

    /// Confusion counts for one fold at one training fraction.
    pub fn fold_counts(
        &self,
        labels: &[bool],
        plan: &FoldPlan,
        fold: usize,
        fraction: f64,
        k: usize,
    ) -> Result<ConfusionCounts, PipelineError> {
        match self {
            PairFeatures::Fixed { rows, .. } => Ok(classify::evaluate_fold(rows, labels, plan, fold, fraction, k)?),
            PairFeatures::PerFoldPca { concat, output_dim } => {
                let train = plan.train_indices(fold, fraction);
                let train_concat: Vec<&[f64]> = train.iter().map(|&i| concat[i].as_slice()).collect();
                let pca = compose::fit_pca(&train_concat, *output_dim)?;
                let train_rows = train_concat.iter().map(|r| pca.project(r)).collect::<Result<Vec<_>, _>>()?;
                let model = KnnModel::new(
                    train_rows.iter().map(Vector::as_slice).collect(),
                    train.iter().map(|&i| labels[i]).collect(),
                    k,
                )?;
                let mut counts = ConfusionCounts::default();
                for &i in plan.test_indices(fold) {
                    counts.record(labels[i], model.predict(&pca.project(&concat[i])?)?);
                }
                Ok(counts)
            }
        }
    }

    /// Serial cross-validation at one training fraction.
    pub fn cross_validate_plan(
        &self,
        labels: &[bool],
        plan: &FoldPlan,
        fraction: f64,
        k: usize,
    ) -> Result<CvResult, PipelineError> {
        let counts = (0..plan.folds())
            .map(|f| self.fold_counts(labels, plan, f, fraction, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CvResult::from_counts(counts))
    }
}

/// Builds the stratified plan after checking inputs and training-split sizes.
pub fn plan_for(
    features: &PairFeatures,
    labels: &[bool],
    config: &CvConfig,
    min_fraction: f64,
) -> Result<FoldPlan, PipelineError> {
    if features.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch { features: features.len(), labels: labels.len() }.into());
    }
    let plan = FoldPlan::stratified(labels, config.folds, config.seed)?;
    classify::check_plan(&plan, config.k, min_fraction)?;
    Ok(plan)
}

pub fn cross_validate_pairs(pairs: &EmbeddedPairs, opts: &FeatureOptions, config: &CvConfig) -> Result<CvResult, PipelineError> {
    let features = build_features(pairs, opts)?;
    let plan = plan_for(&features, &pairs.labels, config, 1.0)?;
    features.cross_validate_plan(&pairs.labels, &plan, 1.0, config.k)
}

pub fn learning_curve_pairs(
    pairs: &EmbeddedPairs,
    opts: &FeatureOptions,
    fractions: &[f64],
    config: &CvConfig,
) -> Result<LearningCurve, PipelineError> {
    classify::check_fractions(fractions)?;
    let features = build_features(pairs, opts)?;
    let plan = plan_for(&features, &pairs.labels, config, fractions[0])?;
    let points = fractions
        .iter()
        .map(|&fraction| {
            let cv = features.cross_validate_plan(&pairs.labels, &plan, fraction, config.k)?;
            Ok(CurvePoint { fraction, mean_f1: cv.mean_f1, std_f1: cv.std_f1 })
        })
        .collect::<Result<_, PipelineError>>()?;
    Ok(LearningCurve { points })
}
