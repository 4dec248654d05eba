use std::collections::BTreeMap;

use super::{CorpusEmbedding, EmbedError, EmbeddingProvider, EmbeddingVector, ProviderIdentity, ProviderKey};
use crate::preprocess::{Segment, TokenStream};

pub const LEXICAL_PROVIDER_NAME: &str = "lexical-tfidf";
pub const LEXICAL_PROVIDER_VERSION: &str = "1";

/// Smoothed tf-idf vocabulary over a set of segments.
///
/// Vocabulary is sorted lexicographically; vector component `i` belongs to
/// `vocabulary[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalModel {
    segment_count: usize,
    vocabulary: Vec<String>,
    document_frequency: Vec<u64>,
    idf: Vec<f64>,
}

impl LexicalModel {
    /// Rebuilds a model from its persisted parts.
    pub fn from_parts(
        segment_count: usize,
        vocabulary: Vec<String>,
        document_frequency: Vec<u64>,
    ) -> Result<Self, String> {
        if vocabulary.len() != document_frequency.len() {
            return Err("vocabulary and document frequencies differ in length".into());
        }
        if vocabulary.windows(2).any(|w| w[0] >= w[1]) {
            return Err("vocabulary is not strictly sorted".into());
        }
        if document_frequency
            .iter()
            .any(|&df| df == 0 || df as usize > segment_count)
        {
            return Err("document frequency out of range".into());
        }
        let idf = document_frequency
            .iter()
            .map(|&df| smoothed_idf(segment_count, df))
            .collect();
        Ok(Self {
            segment_count,
            vocabulary,
            document_frequency,
            idf,
        })
    }

    pub fn segment_count(&self) -> usize {
        self.segment_count
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn document_frequency(&self) -> &[u64] {
        &self.document_frequency
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
    }

    /// `ln((N + 1) / (df + 1)) + 1`; tokens outside the vocabulary have df = 0.
    pub fn idf(&self, token: &str) -> f64 {
        match self.position(token) {
            Some(i) => self.idf[i],
            None => smoothed_idf(self.segment_count, 0),
        }
    }
}

fn smoothed_idf(segment_count: usize, df: u64) -> f64 {
    ((segment_count as f64 + 1.0) / (df as f64 + 1.0)).ln() + 1.0
}

/// Fits the vocabulary and document frequencies.
pub fn build_lexical_model(segments: &[Segment]) -> Result<LexicalModel, EmbedError> {
    if segments.is_empty() {
        return Err(EmbedError::EmptyCorpus("no segments"));
    }
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    for seg in segments {
        let mut seen: Vec<&str> = seg.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(EmbedError::EmptyCorpus("corpus has no tokens after preprocessing"));
    }
    let (vocabulary, document_frequency) = df.into_iter().map(|(t, n)| (t.to_string(), n)).unzip();
    Ok(LexicalModel::from_parts(segments.len(), vocabulary, document_frequency)
        .expect("frequencies derived from the segments are consistent"))
}

/// Raw term frequency times idf over the model vocabulary. Unknown tokens are
/// ignored, so a fully out-of-vocabulary text embeds to the zero vector.
pub fn embed(tokens: &TokenStream, model: &LexicalModel) -> EmbeddingVector {
    embed_tokens(&tokens.tokens, model)
}

fn embed_tokens(tokens: &[String], model: &LexicalModel) -> EmbeddingVector {
    let mut values = vec![0.0; model.dimension()];
    for t in tokens {
        if let Some(i) = model.position(t) {
            values[i] += 1.0;
        }
    }
    for (v, idf) in values.iter_mut().zip(&model.idf) {
        *v *= idf;
    }
    EmbeddingVector::new(values).expect("model dimension is positive and weights finite")
}

/// Deterministic tf-idf provider.
#[derive(Debug, Clone)]
pub struct LexicalProvider {
    version: String,
}

impl Default for LexicalProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl LexicalProvider {
    pub fn new() -> Self {
        Self {
            version: LEXICAL_PROVIDER_VERSION.to_string(),
        }
    }

    /// Same model under a different version label, which invalidates indexes
    /// built with the previous label.
    pub fn with_version(version: impl Into<String>) -> Self {
        Self {
            version: version.into(),
        }
    }
}

impl EmbeddingProvider for LexicalProvider {
    fn key(&mut self) -> Result<ProviderKey, EmbedError> {
        Ok(ProviderKey {
            name: LEXICAL_PROVIDER_NAME.to_string(),
            version: self.version.clone(),
        })
    }

    fn embed_corpus(&mut self, segments: &[Segment]) -> Result<CorpusEmbedding, EmbedError> {
        let model = build_lexical_model(segments)?;
        let vectors = segments
            .iter()
            .map(|s| embed_tokens(&s.tokens, &model))
            .collect();
        Ok(CorpusEmbedding {
            identity: ProviderIdentity {
                name: LEXICAL_PROVIDER_NAME.to_string(),
                version: self.version.clone(),
                dimension: model.dimension(),
            },
            vectors,
            lexical_model: Some(model),
        })
    }

    fn embed_query(
        &mut self,
        query: &TokenStream,
        lexical_model: Option<&LexicalModel>,
    ) -> Result<EmbeddingVector, EmbedError> {
        let model = lexical_model.ok_or(EmbedError::MissingLexicalModel)?;
        Ok(embed(query, model))
    }
}
