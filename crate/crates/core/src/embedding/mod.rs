//! Embedding providers and vector similarity.
//!
//! A provider turns corpus segments and queries into fixed-length vectors.
//! [`LexicalProvider`] is the built-in deterministic tf-idf model;
//! [`ExternalProvider`] talks to a child process over a line-delimited JSON
//! protocol so any neural model can be plugged in.

mod external;
mod lexical;
pub mod test_double;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::preprocess::{Segment, TokenStream};

pub use external::{embed_external, probe_identity, ExternalBatch, ExternalConfig, ExternalProvider};
pub use lexical::{build_lexical_model, embed, LexicalModel, LexicalProvider};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("vector has a non-finite component at position {position}")]
    NonFinite { position: usize },
    #[error("vector dimension must be positive")]
    ZeroDimension,
    #[error("nothing to embed: {0}")]
    EmptyCorpus(&'static str),
    #[error("failed to launch provider `{command}`: {source}")]
    Launch {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("provider handshake invalid: {0}")]
    Handshake(String),
    #[error("malformed provider response on line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("provider changed dimension at item {index}: expected {expected}, got {actual}")]
    DimensionDrift {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("provider failed item {index}: {message}")]
    ItemFailed { index: usize, message: String },
    #[error("provider timed out after {timeout_ms} ms waiting for {waiting_for}")]
    Timeout { timeout_ms: u128, waiting_for: String },
    #[error("provider exited after {received} of {expected} responses")]
    ProcessExited { received: usize, expected: usize },
    #[error("provider identity changed: indexed with {indexed}, now {current}")]
    IdentityChanged { indexed: String, current: String },
    #[error("lexical provider requires the index's lexical model")]
    MissingLexicalModel,
    #[error("provider i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Dense embedding. Components are finite and the dimension is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbedError> {
        if values.is_empty() {
            return Err(EmbedError::ZeroDimension);
        }
        if let Some(position) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite { position });
        }
        Ok(Self { values })
    }

    pub fn zeros(dimension: usize) -> Result<Self, EmbedError> {
        Self::new(vec![0.0; dimension])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = EmbedError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbedError> {
    if u.dimension() != v.dimension() {
        return Err(EmbedError::DimensionMismatch {
            left: u.dimension(),
            right: v.dimension(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.values.iter().zip(&v.values) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    // sqrt of the product keeps self-similarity exactly 1.0
    let product = nu * nv;
    let denominator = if product.is_finite() && product.is_normal() {
        product.sqrt()
    } else {
        nu.sqrt() * nv.sqrt()
    };
    Ok((dot / denominator).clamp(-1.0, 1.0))
}

/// What determines embedding semantics: two providers with the same key
/// produce interchangeable vectors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProviderKey {
    pub name: String,
    pub version: String,
}

impl fmt::Display for ProviderKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderIdentity {
    pub name: String,
    pub version: String,
    pub dimension: usize,
}

impl ProviderIdentity {
    pub fn key(&self) -> ProviderKey {
        ProviderKey {
            name: self.name.clone(),
            version: self.version.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEmbedding {
    pub file_path: String,
    pub segment_index: usize,
    pub vector: EmbeddingVector,
}

/// Output of embedding a whole corpus, one vector per input segment.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEmbedding {
    pub identity: ProviderIdentity,
    pub vectors: Vec<EmbeddingVector>,
    /// Present only for the lexical provider; needed to embed later queries.
    pub lexical_model: Option<LexicalModel>,
}

pub trait EmbeddingProvider {
    /// Name and version, available before anything is embedded.
    fn key(&mut self) -> Result<ProviderKey, EmbedError>;

    fn embed_corpus(&mut self, segments: &[Segment]) -> Result<CorpusEmbedding, EmbedError>;

    /// Embeds a whole query. `lexical_model` is the one stored with the index.
    fn embed_query(
        &mut self,
        query: &TokenStream,
        lexical_model: Option<&LexicalModel>,
    ) -> Result<EmbeddingVector, EmbedError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn key(&mut self) -> Result<ProviderKey, EmbedError> {
        (**self).key()
    }

    fn embed_corpus(&mut self, segments: &[Segment]) -> Result<CorpusEmbedding, EmbedError> {
        (**self).embed_corpus(segments)
    }

    fn embed_query(
        &mut self,
        query: &TokenStream,
        lexical_model: Option<&LexicalModel>,
    ) -> Result<EmbeddingVector, EmbedError> {
        (**self).embed_query(query, lexical_model)
    }
}

/// Wraps a provider and counts embedding work. Used to observe whether an
/// index was rebuilt or reused.
#[derive(Debug, Clone, Default)]
pub struct CountingProvider<P> {
    inner: P,
    pub corpus_calls: usize,
    pub segments_embedded: usize,
    pub query_calls: usize,
}

impl<P> CountingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            corpus_calls: 0,
            segments_embedded: 0,
            query_calls: 0,
        }
    }

    pub fn reset(&mut self) {
        self.corpus_calls = 0;
        self.segments_embedded = 0;
        self.query_calls = 0;
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CountingProvider<P> {
    fn key(&mut self) -> Result<ProviderKey, EmbedError> {
        self.inner.key()
    }

    fn embed_corpus(&mut self, segments: &[Segment]) -> Result<CorpusEmbedding, EmbedError> {
        self.corpus_calls += 1;
        self.segments_embedded += segments.len();
        self.inner.embed_corpus(segments)
    }

    fn embed_query(
        &mut self,
        query: &TokenStream,
        lexical_model: Option<&LexicalModel>,
    ) -> Result<EmbeddingVector, EmbedError> {
        self.query_calls += 1;
        self.inner.embed_query(query, lexical_model)
    }
}
