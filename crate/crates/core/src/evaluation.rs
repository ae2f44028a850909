//! Run aggregation, convergence diagnostics and report files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::confidence::{self, CorrelationTable};
use crate::engine::{PredictionRecord, RunConfig, RunOutput};
use crate::error::{Error, Result};
use crate::memory::{AuxiliaryMemory, MemoryUsage};
use crate::metric;
use crate::numfmt::fmt17;
use crate::rng::GENERATOR_NAME;
use crate::store::{DatasetManifest, EmbeddingStore};
use crate::types::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Warmup,
    Test,
}

impl Stage {
    pub fn label(&self) -> &'static str {
        match self {
            Stage::Warmup => "warmup",
            Stage::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    pub batch_index: u64,
    pub stage: Stage,
    pub accuracy: f64,
    pub memory: MemoryUsage,
    pub effective_shots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConvergence {
    pub class_id: ClassId,
    pub support_count: usize,
    pub aux_count: usize,
    /// `‖p⁽⁰⁾ − μ‖₂` for the support-only prototype.
    pub support_error: f64,
    /// `‖mean(aux) − μ‖₂`.
    pub aux_mean_error: f64,
    /// `‖p_aux − μ‖₂` for the support-plus-aux prototype.
    pub augmented_error: f64,
    pub warmup_sufficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub config_digest: String,
    pub generator: String,
    pub dataset: DatasetManifest,
    pub mean_accuracy: f64,
    pub ci95: f64,
    pub scored_batches: usize,
    pub batch_indices: Vec<u64>,
    pub per_batch_accuracy: Vec<f64>,
    pub cumulative_accuracy: Vec<f64>,
    pub memory_curve: Vec<MemoryUsage>,
    pub warmup_accuracy: Vec<f64>,
    pub warmup_cumulative_accuracy: Vec<f64>,
    pub warmup_memory_curve: Vec<MemoryUsage>,
    pub shots_remaining: Option<Vec<usize>>,
    pub correlation_table: Option<CorrelationTable>,
    pub correlation_error: Option<String>,
    pub convergence: Option<Vec<ClassConvergence>>,
}

impl RunReport {
    pub fn build(
        config: &RunConfig,
        dataset: DatasetManifest,
        batches: &[BatchSummary],
        records: &[PredictionRecord],
        convergence: Option<Vec<ClassConvergence>>,
    ) -> Result<Self> {
        let (test, warm): (Vec<&BatchSummary>, Vec<&BatchSummary>) =
            batches.iter().partition(|b| b.stage == Stage::Test);
        let per_batch_accuracy: Vec<f64> = test.iter().map(|b| b.accuracy).collect();
        let warmup_accuracy: Vec<f64> = warm.iter().map(|b| b.accuracy).collect();
        if per_batch_accuracy.is_empty() {
            return Err(Error::EmptySet("no scored batches"));
        }

        let scored: Vec<_> = records
            .iter()
            .filter(|r| r.stage == Stage::Test)
            .map(|r| r.scores)
            .collect();
        let (correlation_table, correlation_error) = match confidence::correlation_table(&scored) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        };

        Ok(Self {
            config: config.clone(),
            config_digest: config_digest(config),
            generator: GENERATOR_NAME.to_string(),
            dataset,
            mean_accuracy: mean(&per_batch_accuracy),
            ci95: ci95(&per_batch_accuracy),
            scored_batches: per_batch_accuracy.len(),
            batch_indices: test.iter().map(|b| b.batch_index).collect(),
            cumulative_accuracy: cumulative_mean(&per_batch_accuracy),
            memory_curve: test.iter().map(|b| b.memory).collect(),
            warmup_cumulative_accuracy: cumulative_mean(&warmup_accuracy),
            warmup_memory_curve: warm.iter().map(|b| b.memory).collect(),
            warmup_accuracy,
            per_batch_accuracy,
            shots_remaining: config
                .shot_removal_k
                .map(|_| test.iter().map(|b| b.effective_shots).collect()),
            correlation_table,
            correlation_error,
            convergence,
        })
    }

    pub fn final_memory(&self) -> MemoryUsage {
        self.memory_curve.last().copied().unwrap_or_default()
    }
}

/// Fraction of records whose prediction matches the true class.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptySet("accuracy of no records"));
    }
    let correct = records.iter().filter(|r| r.correct()).count();
    Ok(correct as f64 / records.len() as f64)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `1.96 · s / √T` with `s` the sample standard deviation; 0 for fewer than two values.
pub fn ci95(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    1.96 * var.sqrt() / (xs.len() as f64).sqrt()
}

pub fn cumulative_mean(xs: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            total += x;
            total / (i + 1) as f64
        })
        .collect()
}

pub fn config_digest(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let hash = Sha256::digest(&bytes);
    hash.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-class prototype errors against the ground-truth means of a synthetic
/// store. `warmup_sufficient` holds when the aux-mean error is below
/// `strictness` times the support-prototype error. Classes with an empty
/// auxiliary set or no support snapshot are left out.
pub fn convergence_report(
    memory: &AuxiliaryMemory,
    store: &EmbeddingStore,
    support_snapshot: &BTreeMap<ClassId, Vec<Vec<f64>>>,
    strictness: f64,
) -> Result<Vec<ClassConvergence>> {
    let mut out = Vec::new();
    for class in memory.classes() {
        let mu = store
            .true_mean(class)?
            .ok_or(Error::UnsupportedDiagnostic("store has no ground-truth means"))?;
        let aux = memory.retrieve(class);
        let Some(support) = support_snapshot.get(&class) else {
            continue;
        };
        if aux.is_empty() || support.is_empty() {
            continue;
        }
        let support: Vec<&[f64]> = support.iter().map(Vec::as_slice).collect();
        let p0 = metric::prototype_from_support(0, &support)?;
        let aux_mean = metric::mean_vector(&aux)?;
        let p_aux = metric::prototype_augmented(0, &support, &aux)?;
        let support_error = l2_distance(&p0.vector, mu);
        let aux_mean_error = l2_distance(&aux_mean, mu);
        out.push(ClassConvergence {
            class_id: class,
            support_count: support.len(),
            aux_count: aux.len(),
            support_error,
            aux_mean_error,
            augmented_error: l2_distance(&p_aux.vector, mu),
            warmup_sufficient: aux_mean_error < strictness * support_error,
        });
    }
    if out.is_empty() && store.source() == crate::store::Source::File {
        return Err(Error::UnsupportedDiagnostic("store has no ground-truth means"));
    }
    Ok(out)
}

/// JSON formatter that writes floats as `%.17g`, otherwise pretty-printed.
struct ReportFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
                self.inner.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for ReportFormatter<'_> {
    delegate! {
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    }

    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn report_json(report: &RunReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        ReportFormatter {
            inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
        },
    );
    report.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn predictions_csv(records: &[PredictionRecord], n_way: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "batch_index",
        "stage",
        "sample_id",
        "true_global",
        "predicted_global",
        "accepted",
        "update_outcome",
        "delta",
        "delta_prime",
        "conf_max",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..n_way).map(|c| format!("logit_{c}")));
    header.extend((0..n_way).map(|c| format!("prob_{c}")));
    w.write_record(&header).map_err(|e| Error::csv("predictions.csv", e))?;
    for r in records {
        let mut row = vec![
            r.batch_index.to_string(),
            r.stage.label().to_string(),
            r.sample_id.to_string(),
            r.true_global.to_string(),
            r.predicted_global.to_string(),
            r.accepted.to_string(),
            r.update_outcome.map(|o| o.label()).unwrap_or("").to_string(),
            fmt17(r.scores.delta),
            fmt17(r.scores.delta_prime),
            fmt17(r.scores.conf_max),
        ];
        row.extend(r.logits.iter().map(|&v| fmt17(v)));
        row.extend(r.probabilities.iter().map(|&v| fmt17(v)));
        w.write_record(&row).map_err(|e| Error::csv("predictions.csv", e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io("predictions.csv", e.into_error()))
}

pub fn curves_csv(report: &RunReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "batch_index",
        "per_batch_accuracy",
        "cumulative_accuracy",
        "mem_entries",
        "mem_bytes",
    ])
    .map_err(|e| Error::csv("curves.csv", e))?;
    for i in 0..report.scored_batches {
        w.write_record([
            report.batch_indices[i].to_string(),
            fmt17(report.per_batch_accuracy[i]),
            fmt17(report.cumulative_accuracy[i]),
            report.memory_curve[i].entries.to_string(),
            report.memory_curve[i].bytes.to_string(),
        ])
        .map_err(|e| Error::csv("curves.csv", e))?;
    }
    w.into_inner().map_err(|e| Error::io("curves.csv", e.into_error()))
}

pub fn aux_dump_csv(memory: Option<&AuxiliaryMemory>, report: &RunReport) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match memory {
        Some(m) => m.dump_csv(&mut buf)?,
        None => AuxiliaryMemory::new(report.dataset.dimension, report.config.strategy).dump_csv(&mut buf)?,
    }
    Ok(buf)
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
    Ok(())
}

/// Writes `report.json`, `predictions.csv`, `curves.csv` and `aux_dump.csv` into `out_dir`.
pub fn emit(output: &RunOutput, out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let report = &output.report;
    write_atomic(dir, "report.json", &report_json(report)?)?;
    write_atomic(
        dir,
        "predictions.csv",
        &predictions_csv(&output.records, report.config.n_way)?,
    )?;
    write_atomic(dir, "curves.csv", &curves_csv(report)?)?;
    write_atomic(dir, "aux_dump.csv", &aux_dump_csv(output.memory.as_ref(), report)?)?;
    Ok(())
}

pub fn read_report(dir: impl AsRef<Path>) -> Result<RunReport> {
    let path = dir.as_ref().join("report.json");
    let text = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_slice(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confidence::ConfidenceScores;
    use crate::memory::Strategy;
    use crate::store::ClassSpec;
    use crate::types::{Embedding, SampleId};

    fn rec(t: u64, correct: bool) -> PredictionRecord {
        PredictionRecord {
            batch_index: t,
            stage: Stage::Test,
            sample_id: SampleId(0),
            true_global: ClassId(0),
            predicted_global: ClassId(if correct { 0 } else { 1 }),
            logits: vec![0.0, -1.0],
            probabilities: vec![0.7, 0.3],
            scores: ConfidenceScores {
                delta: 0.1,
                delta_prime: 0.2,
                conf_max: 0.7,
            },
            accepted: false,
            update_outcome: None,
        }
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[rec(0, true), rec(0, true)]).unwrap(), 1.0);
        let r = [rec(0, true), rec(0, false), rec(0, true), rec(0, true)];
        assert_eq!(accuracy(&r).unwrap(), 0.75);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn ci_and_cumulative() {
        let xs = [0.5, 0.7, 0.9];
        let cum = cumulative_mean(&xs);
        for (got, want) in cum.iter().zip([0.5, 0.6, 0.7]) {
            assert!((got - want).abs() < 1e-15);
        }
        let want = 1.96 * 0.2 / 3f64.sqrt();
        assert!((ci95(&xs) - want).abs() < 1e-15);
        assert_eq!(ci95(&[0.4]), 0.0);
    }

    #[test]
    fn float_json_format() {
        let v: serde_json::Value = serde_json::from_str("[0.1, 1.0, 2560]").unwrap();
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(
            &mut buf,
            ReportFormatter {
                inner: serde_json::ser::PrettyFormatter::with_indent(b""),
            },
        );
        v.serialize(&mut ser).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.split_whitespace().collect::<String>(), "[0.10000000000000001,1,2560]");
    }

    fn synth() -> EmbeddingStore {
        let specs = [ClassSpec {
            class_id: ClassId(0),
            mean: vec![0.0, 0.0],
            stddev: 1.0,
        }];
        EmbeddingStore::generate_synthetic(&specs, 10, 1).unwrap()
    }

    #[test]
    fn convergence_identical_sets() {
        let store = synth();
        let support: Vec<Vec<f64>> = store.samples()[..3].iter().map(|e| e.vector.clone()).collect();
        let mut memory = AuxiliaryMemory::new(2, Strategy::Add);
        let s = ConfidenceScores {
            delta: 1.0,
            delta_prime: 1.0,
            conf_max: 1.0,
        };
        for e in &store.samples()[..3] {
            memory.update(e, ClassId(0), s, 0).unwrap();
        }
        let snap = BTreeMap::from([(ClassId(0), support)]);
        let rep = convergence_report(&memory, &store, &snap, 1.0).unwrap();
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].aux_mean_error, rep[0].support_error);
        assert!(!rep[0].warmup_sufficient);
    }

    #[test]
    fn convergence_omits_empty_and_rejects_files() {
        let store = synth();
        let memory = AuxiliaryMemory::new(2, Strategy::Add);
        assert!(convergence_report(&memory, &store, &BTreeMap::new(), 1.0).unwrap().is_empty());

        let file = EmbeddingStore::read_csv("class_id,sample_id,f0,f1\n0,1,0,0\n".as_bytes()).unwrap();
        let mut memory = AuxiliaryMemory::new(2, Strategy::Add);
        let e = Embedding {
            sample_id: SampleId(1),
            vector: vec![0.0, 0.0],
            true_class: ClassId(0),
        };
        let s = ConfidenceScores {
            delta: 1.0,
            delta_prime: 1.0,
            conf_max: 1.0,
        };
        memory.update(&e, ClassId(0), s, 0).unwrap();
        assert!(matches!(
            convergence_report(&memory, &file, &BTreeMap::new(), 1.0),
            Err(Error::UnsupportedDiagnostic(_))
        ));
    }
}
