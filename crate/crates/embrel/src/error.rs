use std::io;
use std::path::PathBuf;

use embrel_core::classify::ClassifyError;
use embrel_core::compose::ComposeError;
use embrel_core::dataset::DatasetError;
use embrel_core::embeddings::EmbeddingError;
use embrel_core::pipeline::PipelineError;
use embrel_core::simeval::SimEvalError;
use embrel_core::textproc::LemmaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{source}")]
    Stream {
        #[from]
        source: io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{origin}: {source}")]
    Embedding {
        origin: String,
        #[source]
        source: EmbeddingError,
    },
    #[error("{origin}: line {line}: {reason}")]
    MalformedRow { origin: String, line: u64, reason: String },
    #[error("{origin}: line {line}: label {value:?} is not 0 or 1")]
    BadLabel { origin: String, line: u64, value: String },
    #[error("{origin}: no data rows")]
    EmptyInput { origin: String },
    #[error("{origin}: {source}")]
    Lemma {
        origin: String,
        #[source]
        source: LemmaError,
    },
    #[error(transparent)]
    SimEval(#[from] SimEvalError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Configuration and input-file problems, as opposed to failures while computing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Config(_)
                | Error::Embedding { .. }
                | Error::MalformedRow { .. }
                | Error::BadLabel { .. }
                | Error::EmptyInput { .. }
                | Error::Lemma { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
