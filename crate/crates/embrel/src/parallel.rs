//! Rayon-backed fold evaluation.
//!
//! The fold plan is built serially before any work is spread out, and results
//! are collected in fold order, so these runners return exactly what the
//! serial versions in `embrel_core` return.

use embrel_core::classify::{self, CurvePoint, CvConfig, CvResult, FoldPlan, LearningCurve};
use embrel_core::pipeline::{PairFeatures, PipelineError};
use rayon::prelude::*;

use crate::error::Result;

pub fn cross_validate_plan(features: &PairFeatures, labels: &[bool], plan: &FoldPlan, fraction: f64, k: usize) -> Result<CvResult> {
    let counts = (0..plan.folds())
        .into_par_iter()
        .map(|f| features.fold_counts(labels, plan, f, fraction, k))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(CvResult::from_counts(counts))
}

pub fn learning_curve_plan(
    features: &PairFeatures,
    labels: &[bool],
    plan: &FoldPlan,
    fractions: &[f64],
    k: usize,
) -> Result<LearningCurve> {
    classify::check_fractions(fractions)?;
    let cells: Vec<(usize, usize)> =
        (0..fractions.len()).flat_map(|p| (0..plan.folds()).map(move |f| (p, f))).collect();
    let counts = cells
        .par_iter()
        .map(|&(p, f)| features.fold_counts(labels, plan, f, fractions[p], k))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let points = counts
        .chunks(plan.folds())
        .zip(fractions)
        .map(|(chunk, &fraction)| {
            let cv = CvResult::from_counts(chunk.to_vec());
            CurvePoint { fraction, mean_f1: cv.mean_f1, std_f1: cv.std_f1 }
        })
        .collect();
    Ok(LearningCurve { points })
}

/// Parallel counterpart of [`embrel_core::classify::cross_validate`] for a plain feature matrix.
pub fn cross_validate<R: AsRef<[f64]> + Sync>(features: &[R], labels: &[bool], config: &CvConfig) -> Result<CvResult> {
    if features.len() != labels.len() {
        return Err(classify::ClassifyError::LengthMismatch { features: features.len(), labels: labels.len() }.into());
    }
    let plan = FoldPlan::stratified(labels, config.folds, config.seed)?;
    classify::check_plan(&plan, config.k, 1.0)?;
    let counts = (0..plan.folds())
        .into_par_iter()
        .map(|f| classify::evaluate_fold(features, labels, &plan, f, 1.0, config.k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CvResult::from_counts(counts))
}
