use std::fmt;

use serde::{Deserialize, Serialize};

/// Global class identifier, stable across episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Sample identity, assigned once at ingestion or generation and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleId(pub u64);

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An embedded sample: feature vector plus identity and ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub sample_id: SampleId,
    pub vector: Vec<f64>,
    pub true_class: ClassId,
}

impl Embedding {
    pub fn dimension(&self) -> usize {
        self.vector.len()
    }
}
