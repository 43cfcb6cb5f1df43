//! Core algorithms for evaluating word-embedding tables and detecting
//! semantic relatedness between forum posts.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO: every
//! parser here works on `&str` input that the caller has already read.
//! The `embrel` crate carries the file formats and the command-line front end.
//!
//! Pipeline overview:
//!
//! 1. [`embeddings`] loads word2vec / GloVe text tables and provides cosine similarity.
//! 2. [`simeval`] scores a table against gold word-pair judgments
//!    (Spearman's rho or average precision from [`metrics`]), dropping OOV pairs.
//! 3. [`textproc`] cleans and tokenizes post text, [`compose`] mean-pools the
//!    tokens into post vectors and builds pair features (SUM / CON / CON+PCA).
//! 4. [`classify`] runs a cosine KNN under stratified k-fold cross-validation
//!    and produces learning curves.
//! 5. [`dataset`] validates post-pair records and aggregates raw annotations
//!    into majority labels.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
pub mod compose;
pub mod dataset;
pub mod embeddings;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod simeval;
pub mod textproc;
pub mod vector;

pub use classify::{CvConfig, CvResult, FoldPlan, KnnModel, LearningCurve};
pub use compose::{CompositionStrategy, ConcatOrder, PcaModel, PostVector};
pub use embeddings::EmbeddingTable;
pub use metrics::ConfusionCounts;
pub use simeval::{JudgmentKind, SimEvalReport, WordJudgmentSet};
pub use vector::Vector;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;
