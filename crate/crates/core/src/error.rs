use crate::embedding::EmbedError;
use crate::eval::EvalError;
use crate::index_store::IndexError;
use crate::ingest::IngestError;
use crate::localize::LocalizeError;
use crate::trace::TraceError;

/// Any error produced by the library, grouped by the stage that raised it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-friendly category, used in CLI diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Ingest(IngestError::EmptyCorpus { .. }) => "empty-corpus",
            Error::Ingest(_) => "ingest",
            Error::Embed(_) => "embed",
            Error::Index(_) => "storage",
            Error::Trace(_) => "trace",
            Error::Localize(_) => "localize",
            Error::Eval(_) => "dataset",
            Error::Io(_) => "io",
        }
    }
}
