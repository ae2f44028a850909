//! Episode-by-episode inference driver.
//!
//! Three modes share one batch routine:
//!
//! - `pn`: support-only prototypes, no memory.
//! - `ipec`: prototypes from support plus the auxiliary set, memory updated
//!   and every batch scored.
//! - `ipec_two_stage`: `warmup_batches` unscored batches that only grow the
//!   memory, then the memory is frozen and `test_batches` are scored.
//!
//! Within a batch, prototypes are built once before any query is classified,
//! and accepted queries are written to memory afterwards in query order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::confidence::{self, ConfidenceScores, Thresholds};
use crate::episode::{episode_stream, Episode, EpisodeShape};
use crate::error::{Error, Result};
use crate::evaluation::{self, BatchSummary, RunReport, Stage};
use crate::memory::{AuxiliaryMemory, Strategy, UpdateOutcome};
use crate::metric::{self, Metric, Prototype};
use crate::store::EmbeddingStore;
use crate::types::{ClassId, SampleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pn,
    Ipec,
    IpecTwoStage,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pn" => Ok(Mode::Pn),
            "ipec" => Ok(Mode::Ipec),
            "ipec_two_stage" => Ok(Mode::IpecTwoStage),
            _ => Err(Error::InvalidConfig(format!(
                "unknown mode {s:?} (expected pn, ipec or ipec_two_stage)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Pn => "pn",
            Mode::Ipec => "ipec",
            Mode::IpecTwoStage => "ipec_two_stage",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_way: usize,
    pub k_shot: usize,
    pub m_query: usize,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default)]
    pub warmup_batches: u64,
    pub test_batches: u64,
    pub seed: u64,
    #[serde(default)]
    pub shot_removal_k: Option<u64>,
}

fn default_metric() -> Metric {
    Metric::Euclidean
}

fn default_strategy() -> Strategy {
    Strategy::Remove
}

impl RunConfig {
    pub fn shape(&self) -> EpisodeShape {
        EpisodeShape {
            n_way: self.n_way,
            k_shot: self.k_shot,
            m_query: self.m_query,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_way < 2 {
            return bad(format!("n_way must be at least 2, got {}", self.n_way));
        }
        if self.k_shot == 0 || self.m_query == 0 {
            return bad("k_shot and m_query must be positive".into());
        }
        if self.test_batches == 0 {
            return bad("test_batches must be positive".into());
        }
        self.thresholds.validate()?;
        if self.mode == Mode::IpecTwoStage && self.warmup_batches == 0 {
            return bad("ipec_two_stage requires warmup_batches > 0".into());
        }
        if let Some(k) = self.shot_removal_k {
            if self.mode != Mode::Ipec {
                return bad(format!("shot_removal_k requires mode ipec, got {}", self.mode));
            }
            if k == 0 {
                return bad("shot_removal_k must be at least 1".into());
            }
        }
        Ok(())
    }

    fn uses_memory(&self) -> bool {
        self.mode != Mode::Pn
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub batch_index: u64,
    pub stage: Stage,
    pub sample_id: SampleId,
    pub true_global: ClassId,
    pub predicted_global: ClassId,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub scores: ConfidenceScores,
    pub accepted: bool,
    pub update_outcome: Option<UpdateOutcome>,
}

impl PredictionRecord {
    pub fn correct(&self) -> bool {
        self.predicted_global == self.true_global
    }
}

/// Everything a run produces. `report` is the serializable summary; the
/// record log and memory snapshots feed the CSV outputs.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub records: Vec<PredictionRecord>,
    pub memory: Option<AuxiliaryMemory>,
    /// Memory as it stood at the freeze point of a two-stage run.
    pub frozen_snapshot: Option<AuxiliaryMemory>,
}

/// Classifies one episode and, when `memory` is given, applies accepted
/// updates after all queries are scored.
pub fn run_batch(
    episode: &Episode<'_>,
    memory: Option<&mut AuxiliaryMemory>,
    config: &RunConfig,
) -> Result<Vec<PredictionRecord>> {
    run_batch_inner(episode, memory, config, None, Stage::Test)
}

fn build_prototypes(
    episode: &Episode<'_>,
    memory: Option<&AuxiliaryMemory>,
    effective_shots: Option<usize>,
) -> Result<Vec<Prototype>> {
    let mut prototypes = Vec::with_capacity(episode.n_way());
    for (c, &class) in episode.class_map.iter().enumerate() {
        let full: Vec<&[f64]> = episode.support[c].iter().map(|e| e.vector.as_slice()).collect();
        let aux = memory.map(|m| m.retrieve(class)).unwrap_or_default();
        let keep = match effective_shots {
            Some(0) if aux.is_empty() => 1,
            Some(n) => n.min(full.len()),
            None => full.len(),
        };
        prototypes.push(metric::prototype_augmented(c, &full[..keep], &aux)?);
    }
    Ok(prototypes)
}

fn run_batch_inner(
    episode: &Episode<'_>,
    memory: Option<&mut AuxiliaryMemory>,
    config: &RunConfig,
    effective_shots: Option<usize>,
    stage: Stage,
) -> Result<Vec<PredictionRecord>> {
    let prototypes = build_prototypes(episode, memory.as_deref(), effective_shots)?;
    let gated = memory.is_some();

    let mut records = Vec::with_capacity(episode.query.iter().map(Vec::len).sum());
    for (c, query) in episode.queries() {
        let logits = metric::logits(&query.vector, &prototypes, config.metric)?;
        let probs = metric::softmax(&logits.values);
        let predicted = metric::predict(&probs);
        let scores = confidence::scores(&probs);
        let accepted = gated && confidence::accept(&scores, &config.thresholds);
        records.push(PredictionRecord {
            batch_index: episode.batch_index,
            stage,
            sample_id: query.sample_id,
            true_global: episode.class_map[c],
            predicted_global: episode.class_map[predicted],
            logits: logits.values,
            probabilities: probs.values,
            scores,
            accepted,
            update_outcome: None,
        });
    }

    if let Some(memory) = memory {
        let queries: Vec<_> = episode.queries().map(|(_, q)| q).collect();
        for (record, query) in records.iter_mut().zip(queries) {
            if record.accepted {
                record.update_outcome =
                    Some(memory.update(query, record.predicted_global, record.scores, record.batch_index)?);
            }
        }
    }
    Ok(records)
}

/// Runs a full experiment. Shot removal is applied when `shot_removal_k` is set.
pub fn run(store: &EmbeddingStore, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let warmup = if config.mode == Mode::IpecTwoStage {
        config.warmup_batches
    } else {
        0
    };
    let stream = episode_stream(store, config.shape(), config.seed, warmup + config.test_batches)?;

    let mut memory = config.uses_memory().then(|| {
        AuxiliaryMemory::new(store.dimension(), config.strategy).with_known_classes(store.class_ids())
    });
    let mut frozen_snapshot = None;
    let mut first_support: BTreeMap<ClassId, Vec<Vec<f64>>> = BTreeMap::new();
    let mut records = Vec::new();
    let mut batches = Vec::with_capacity((warmup + config.test_batches) as usize);

    for episode in stream {
        let t = episode.batch_index;
        let stage = if t < warmup { Stage::Warmup } else { Stage::Test };
        if t == warmup && warmup > 0 {
            if let Some(m) = memory.as_mut() {
                m.freeze();
                frozen_snapshot = Some(m.clone());
            }
        }
        for (c, &class) in episode.class_map.iter().enumerate() {
            first_support
                .entry(class)
                .or_insert_with(|| episode.support[c].iter().map(|e| e.vector.clone()).collect());
        }

        let effective_shots = config
            .shot_removal_k
            .map(|k| config.k_shot.saturating_sub((t / k) as usize));
        let batch = run_batch_inner(&episode, memory.as_mut(), config, effective_shots, stage)?;
        let accuracy = evaluation::accuracy(&batch)?;
        batches.push(BatchSummary {
            batch_index: t,
            stage,
            accuracy,
            memory: memory.as_ref().map(AuxiliaryMemory::memory_usage).unwrap_or_default(),
            effective_shots: effective_shots.unwrap_or(config.k_shot),
        });
        records.extend(batch);
    }

    let convergence = match (&memory, store.source()) {
        (Some(m), crate::store::Source::Synthetic) => {
            Some(evaluation::convergence_report(m, store, &first_support, 1.0)?)
        }
        _ => None,
    };
    let report = RunReport::build(config, store.manifest(), &batches, &records, convergence)?;
    Ok(RunOutput {
        report,
        records,
        memory,
        frozen_snapshot,
    })
}

/// Support-shot removal: effective shots at batch `t` are `max(0, K - t / k)`.
pub fn run_shot_removal(store: &EmbeddingStore, config: &RunConfig) -> Result<RunOutput> {
    if config.shot_removal_k.is_none() {
        return Err(Error::InvalidConfig("run_shot_removal needs shot_removal_k".into()));
    }
    run(store, config)
}
