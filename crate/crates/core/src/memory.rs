//! Per-class auxiliary sets accumulated from accepted query samples.
//!
//! Duplicates are identified by `sample_id`. Strategies differ only in how a
//! sample that is already stored is handled:
//!
//! | strategy | same class          | different class              |
//! |----------|---------------------|------------------------------|
//! | ADD      | appended again      | appended again               |
//! | REPLACE  | skipped             | moved to the new class       |
//! | REMOVE   | skipped             | purged from both             |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::confidence::ConfidenceScores;
use crate::error::{Error, Result};
use crate::numfmt::fmt17;
use crate::types::{ClassId, Embedding, SampleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    Add,
    Replace,
    Remove,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ADD" => Ok(Strategy::Add),
            "REPLACE" => Ok(Strategy::Replace),
            "REMOVE" => Ok(Strategy::Remove),
            _ => Err(Error::InvalidConfig(format!("unknown strategy {s:?}"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Add => "ADD",
            Strategy::Replace => "REPLACE",
            Strategy::Remove => "REMOVE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOutcome {
    Inserted,
    Moved { from: ClassId },
    Purged { from: ClassId },
    SkippedDuplicate,
    RejectedFrozen,
    /// Only reachable when a per-class cap is configured.
    RejectedCapacity,
}

impl UpdateOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            UpdateOutcome::Inserted => "inserted",
            UpdateOutcome::Moved { .. } => "moved",
            UpdateOutcome::Purged { .. } => "purged",
            UpdateOutcome::SkippedDuplicate => "skipped_duplicate",
            UpdateOutcome::RejectedFrozen => "rejected_frozen",
            UpdateOutcome::RejectedCapacity => "rejected_capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxEntry {
    pub sample_id: SampleId,
    pub vector: Vec<f64>,
    pub stored_class: ClassId,
    pub accepted_at_batch: u64,
    pub scores_at_acceptance: ConfidenceScores,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryUsage {
    pub entries: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone)]
pub struct AuxiliaryMemory {
    dimension: usize,
    strategy: Strategy,
    frozen: bool,
    class_cap: Option<usize>,
    known_classes: Option<BTreeSet<ClassId>>,
    sets: BTreeMap<ClassId, Vec<AuxEntry>>,
    index: HashMap<SampleId, ClassId>,
}

impl AuxiliaryMemory {
    pub fn new(dimension: usize, strategy: Strategy) -> Self {
        Self {
            dimension,
            strategy,
            frozen: false,
            class_cap: None,
            known_classes: None,
            sets: BTreeMap::new(),
            index: HashMap::new(),
        }
    }

    /// Restricts updates to the given class universe; other ids are rejected.
    pub fn with_known_classes(mut self, classes: impl IntoIterator<Item = ClassId>) -> Self {
        self.known_classes = Some(classes.into_iter().collect());
        self
    }

    /// Caps each class's auxiliary set. Disabled unless set.
    pub fn with_class_cap(mut self, cap: usize) -> Self {
        self.class_cap = Some(cap);
        self
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn update(
        &mut self,
        sample: &Embedding,
        predicted: ClassId,
        scores: ConfidenceScores,
        batch_index: u64,
    ) -> Result<UpdateOutcome> {
        if self.frozen {
            return Ok(UpdateOutcome::RejectedFrozen);
        }
        if let Some(known) = &self.known_classes {
            if !known.contains(&predicted) {
                return Err(Error::UnknownClass(predicted));
            }
        }
        if sample.vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: sample.vector.len(),
            });
        }

        let previous = self.index.get(&sample.sample_id).copied();
        let outcome = match (self.strategy, previous) {
            (Strategy::Add, _) | (_, None) => {
                if self.is_full(predicted) {
                    return Ok(UpdateOutcome::RejectedCapacity);
                }
                self.insert(sample, predicted, scores, batch_index);
                UpdateOutcome::Inserted
            }
            (_, Some(old)) if old == predicted => UpdateOutcome::SkippedDuplicate,
            (Strategy::Replace, Some(old)) => {
                if self.is_full(predicted) {
                    return Ok(UpdateOutcome::RejectedCapacity);
                }
                self.detach(sample.sample_id, old);
                self.insert(sample, predicted, scores, batch_index);
                UpdateOutcome::Moved { from: old }
            }
            (Strategy::Remove, Some(old)) => {
                self.detach(sample.sample_id, old);
                UpdateOutcome::Purged { from: old }
            }
        };
        Ok(outcome)
    }

    fn is_full(&self, class: ClassId) -> bool {
        match self.class_cap {
            Some(cap) => self.sets.get(&class).map_or(0, Vec::len) >= cap,
            None => false,
        }
    }

    fn insert(&mut self, sample: &Embedding, class: ClassId, scores: ConfidenceScores, batch_index: u64) {
        self.sets.entry(class).or_default().push(AuxEntry {
            sample_id: sample.sample_id,
            vector: sample.vector.clone(),
            stored_class: class,
            accepted_at_batch: batch_index,
            scores_at_acceptance: scores,
        });
        self.index.entry(sample.sample_id).or_insert(class);
    }

    fn detach(&mut self, id: SampleId, class: ClassId) {
        if let Some(set) = self.sets.get_mut(&class) {
            set.retain(|e| e.sample_id != id);
            if set.is_empty() {
                self.sets.remove(&class);
            }
        }
        self.index.remove(&id);
    }

    /// Stored vectors for a class in insertion order.
    pub fn retrieve(&self, class: ClassId) -> Vec<&[f64]> {
        self.entries(class).iter().map(|e| e.vector.as_slice()).collect()
    }

    pub fn entries(&self, class: ClassId) -> &[AuxEntry] {
        self.sets.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.sets.keys().copied()
    }

    pub fn stored_class_of(&self, id: SampleId) -> Option<ClassId> {
        self.index.get(&id).copied()
    }

    pub fn memory_usage(&self) -> MemoryUsage {
        let entries: usize = self.sets.values().map(Vec::len).sum();
        MemoryUsage {
            entries,
            bytes: entries * self.dimension * 4,
        }
    }

    /// CSV dump: `stored_class,sample_id,accepted_at_batch,delta,delta_prime,conf_max,f0..`.
    pub fn dump_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = [
            "stored_class",
            "sample_id",
            "accepted_at_batch",
            "delta",
            "delta_prime",
            "conf_max",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..self.dimension).map(|j| format!("f{j}")));
        w.write_record(&header).map_err(|e| Error::csv("<aux dump>", e))?;
        for entry in self.sets.values().flatten() {
            let s = &entry.scores_at_acceptance;
            let mut row = vec![
                entry.stored_class.to_string(),
                entry.sample_id.to_string(),
                entry.accepted_at_batch.to_string(),
                fmt17(s.delta),
                fmt17(s.delta_prime),
                fmt17(s.conf_max),
            ];
            row.extend(entry.vector.iter().map(|&v| fmt17(v)));
            w.write_record(&row).map_err(|e| Error::csv("<aux dump>", e))?;
        }
        w.flush().map_err(|e| Error::io("<aux dump>", e))?;
        Ok(())
    }

    /// Rebuilds a memory from [`dump_csv`](Self::dump_csv) output. The result is not frozen.
    pub fn restore_csv(reader: impl Read, strategy: Strategy) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::csv("<aux dump>", e))?.clone();
        const FIXED: usize = 6;
        if header.len() < FIXED + 1 || &header[0] != "stored_class" {
            return Err(Error::Format {
                line: 1,
                message: "not an auxiliary memory dump".into(),
            });
        }
        let dimension = header.len() - FIXED;
        let mut memory = Self::new(dimension, strategy);
        for (i, rec) in rdr.records().enumerate() {
            let row = i as u64 + 2;
            let rec = rec.map_err(|e| Error::csv("<aux dump>", e))?;
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::Value {
                    row,
                    message: format!("column {k} is not a number"),
                })
            };
            let int = |k: usize| -> Result<u64> {
                rec[k].parse().map_err(|_| Error::Value {
                    row,
                    message: format!("column {k} is not an integer"),
                })
            };
            let class = ClassId(int(0)? as u32);
            let entry = AuxEntry {
                sample_id: SampleId(int(1)?),
                accepted_at_batch: int(2)?,
                scores_at_acceptance: ConfidenceScores {
                    delta: num(3)?,
                    delta_prime: num(4)?,
                    conf_max: num(5)?,
                },
                vector: (FIXED..rec.len()).map(num).collect::<Result<_>>()?,
                stored_class: class,
            };
            memory.index.entry(entry.sample_id).or_insert(class);
            memory.sets.entry(class).or_default().push(entry);
        }
        Ok(memory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(id: u64) -> Embedding {
        Embedding {
            sample_id: SampleId(id),
            vector: vec![id as f64, 1.0],
            true_class: ClassId(0),
        }
    }

    const S: ConfidenceScores = ConfidenceScores {
        delta: 0.9,
        delta_prime: 0.8,
        conf_max: 0.95,
    };
    const A: ClassId = ClassId(1);
    const B: ClassId = ClassId(2);

    #[test]
    fn fresh_insert_any_strategy() {
        for strategy in [Strategy::Add, Strategy::Replace, Strategy::Remove] {
            let mut m = AuxiliaryMemory::new(2, strategy);
            assert_eq!(m.update(&emb(1), A, S, 0).unwrap(), UpdateOutcome::Inserted);
            assert_eq!(m.retrieve(A).len(), 1);
        }
    }

    #[test]
    fn replace_moves() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Replace);
        m.update(&emb(1), A, S, 0).unwrap();
        assert_eq!(m.update(&emb(1), B, S, 1).unwrap(), UpdateOutcome::Moved { from: A });
        assert!(m.retrieve(A).is_empty());
        assert_eq!(m.entries(B)[0].accepted_at_batch, 1);
        assert_eq!(m.stored_class_of(SampleId(1)), Some(B));
    }

    #[test]
    fn remove_purges() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Remove);
        m.update(&emb(1), A, S, 0).unwrap();
        assert_eq!(m.update(&emb(1), B, S, 1).unwrap(), UpdateOutcome::Purged { from: A });
        assert!(m.retrieve(A).is_empty() && m.retrieve(B).is_empty());
        assert_eq!(m.stored_class_of(SampleId(1)), None);
        // a purged sample can come back later
        assert_eq!(m.update(&emb(1), B, S, 2).unwrap(), UpdateOutcome::Inserted);
    }

    #[test]
    fn same_class_duplicate() {
        for strategy in [Strategy::Replace, Strategy::Remove] {
            let mut m = AuxiliaryMemory::new(2, strategy);
            m.update(&emb(1), A, S, 0).unwrap();
            assert_eq!(m.update(&emb(1), A, S, 1).unwrap(), UpdateOutcome::SkippedDuplicate);
            assert_eq!(m.memory_usage().entries, 1);
        }
        let mut m = AuxiliaryMemory::new(2, Strategy::Add);
        m.update(&emb(1), A, S, 0).unwrap();
        m.update(&emb(1), B, S, 1).unwrap();
        assert_eq!(m.update(&emb(1), A, S, 2).unwrap(), UpdateOutcome::Inserted);
        assert_eq!(m.memory_usage().entries, 3);
        assert_eq!(m.stored_class_of(SampleId(1)), Some(A));
    }

    #[test]
    fn retrieve_order_and_unseen() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Add);
        assert!(m.retrieve(A).is_empty());
        for id in [5, 3, 9] {
            m.update(&emb(id), A, S, 0).unwrap();
        }
        let firsts: Vec<f64> = m.retrieve(A).iter().map(|v| v[0]).collect();
        assert_eq!(firsts, vec![5.0, 3.0, 9.0]);
    }

    #[test]
    fn freeze_contract() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Replace);
        m.update(&emb(1), A, S, 0).unwrap();
        m.freeze();
        m.freeze();
        let before = m.retrieve(A).iter().map(|v| v.to_vec()).collect::<Vec<_>>();
        assert_eq!(m.update(&emb(2), A, S, 1).unwrap(), UpdateOutcome::RejectedFrozen);
        assert_eq!(m.update(&emb(1), B, S, 1).unwrap(), UpdateOutcome::RejectedFrozen);
        let after = m.retrieve(A).iter().map(|v| v.to_vec()).collect::<Vec<_>>();
        assert_eq!(before, after);
        assert_eq!(m.memory_usage().entries, 1);
    }

    #[test]
    fn usage_accounting() {
        let mut m = AuxiliaryMemory::new(64, Strategy::Remove);
        assert_eq!(m.memory_usage(), MemoryUsage { entries: 0, bytes: 0 });
        for id in 0..10 {
            let e = Embedding {
                sample_id: SampleId(id),
                vector: vec![0.5; 64],
                true_class: A,
            };
            m.update(&e, A, S, 0).unwrap();
        }
        assert_eq!(m.memory_usage(), MemoryUsage { entries: 10, bytes: 2560 });
        let e = Embedding {
            sample_id: SampleId(4),
            vector: vec![0.5; 64],
            true_class: A,
        };
        m.update(&e, B, S, 1).unwrap();
        assert_eq!(m.memory_usage(), MemoryUsage { entries: 9, bytes: 2304 });
    }

    #[test]
    fn unknown_class_rejected() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Add).with_known_classes([A]);
        assert!(matches!(m.update(&emb(1), B, S, 0), Err(Error::UnknownClass(c)) if c == B));
    }

    #[test]
    fn class_cap() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Add).with_class_cap(2);
        m.update(&emb(1), A, S, 0).unwrap();
        m.update(&emb(2), A, S, 0).unwrap();
        assert_eq!(m.update(&emb(3), A, S, 0).unwrap(), UpdateOutcome::RejectedCapacity);
        assert_eq!(m.update(&emb(3), B, S, 0).unwrap(), UpdateOutcome::Inserted);
    }

    #[test]
    fn dump_restore_round_trip() {
        let mut m = AuxiliaryMemory::new(2, Strategy::Replace);
        m.update(&emb(1), A, S, 0).unwrap();
        m.update(&emb(2), B, S, 3).unwrap();
        m.update(&emb(3), A, S, 4).unwrap();
        let mut buf = Vec::new();
        m.dump_csv(&mut buf).unwrap();
        let back = AuxiliaryMemory::restore_csv(buf.as_slice(), Strategy::Replace).unwrap();
        let mut again = Vec::new();
        back.dump_csv(&mut again).unwrap();
        assert_eq!(buf, again);
        assert_eq!(back.stored_class_of(SampleId(2)), Some(B));
        assert_eq!(back.memory_usage(), m.memory_usage());
    }
}
