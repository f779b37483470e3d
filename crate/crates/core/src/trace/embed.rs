use thiserror::Error;

use crate::corpus::StopwordList;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("embedding provider unavailable: {0}")]
    Unavailable(String),
    #[error("embedding provider returned {got} vectors for {expected} inputs")]
    Shape { expected: usize, got: usize },
}

/// Sentence embedding backend used to break ties between equally scored
/// extractive sources. Concurrent calls must return the same vectors as
/// serial ones.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbeddingError>;
}

/// Deterministic fallback: term-frequency bag of content words, feature-hashed
/// into a fixed number of dimensions.
#[derive(Debug, Clone)]
pub struct LexicalEmbedder {
    dims: usize,
    stopwords: StopwordList,
}

impl LexicalEmbedder {
    pub fn new(dims: usize, stopwords: StopwordList) -> Self {
        assert!(dims > 0);
        Self { dims, stopwords }
    }

    fn bucket(&self, word: &str) -> usize {
        // FNV-1a, fixed so vectors are stable across runs and platforms.
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in word.bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        (hash % self.dims as u64) as usize
    }
}

impl Default for LexicalEmbedder {
    fn default() -> Self {
        Self::new(4096, StopwordList::english())
    }
}

impl EmbeddingProvider for LexicalEmbedder {
    fn name(&self) -> &str {
        "lexical-tf"
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        Ok(texts
            .iter()
            .map(|text| {
                let mut v = vec![0.0; self.dims];
                for word in self.stopwords.content_words(text) {
                    v[self.bucket(&word)] += 1.0;
                }
                v
            })
            .collect())
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
