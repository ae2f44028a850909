//! Few-shot classification with prototypes that keep improving at test time.
//!
//! Each episode's class prototypes are the mean of its support embeddings
//! plus an auxiliary set of query embeddings that earlier episodes predicted
//! with high confidence. A query joins the auxiliary set of its predicted
//! class only when both its entropy-based and margin-based confidence clear
//! their thresholds.
//!
//! Modules follow the data flow: [`store`] → [`episode`] → [`metric`] →
//! [`confidence`] → [`memory`], driven by [`engine`] and summarized by
//! [`evaluation`].

pub mod confidence;
pub mod engine;
pub mod episode;
pub mod error;
pub mod evaluation;
pub mod memory;
pub mod metric;
pub mod numfmt;
pub mod rng;
pub mod store;
pub mod types;

pub use confidence::{ConfidenceScores, CorrelationTable, Thresholds};
pub use engine::{run, run_batch, run_shot_removal, Mode, PredictionRecord, RunConfig, RunOutput};
pub use episode::{episode_stream, sample_episode, Episode, EpisodeShape};
pub use error::{Error, Result};
pub use evaluation::{emit, RunReport, Stage};
pub use memory::{AuxEntry, AuxiliaryMemory, MemoryUsage, Strategy, UpdateOutcome};
pub use metric::{Logits, Metric, Probabilities, Prototype};
pub use store::{ClassSpec, DatasetManifest, EmbeddingStore, Source};
pub use types::{ClassId, Embedding, SampleId};
