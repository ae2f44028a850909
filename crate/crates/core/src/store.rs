//! Embedding datasets: CSV-backed or synthetic isotropic Gaussian classes.
//!
//! CSV layout is `class_id,sample_id,f0,...,f{d-1}` with one row per sample.
//! Synthetic stores retain their ground-truth class means so convergence
//! diagnostics can measure prototype error directly.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::fmt17;
use crate::rng::StreamRng;
use crate::types::{ClassId, Embedding, SampleId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub class_id: ClassId,
    pub mean: Vec<f64>,
    pub stddev: f64,
}

impl ClassSpec {
    /// Class whose mean is drawn from `N(0, mean_stddev² I)` using ChaCha
    /// stream `class_id` of `mean_seed`, so classes sharing a seed still get
    /// independent means.
    pub fn from_mean_seed(class_id: ClassId, dimension: usize, mean_seed: u64, mean_stddev: f64, stddev: f64) -> Self {
        let mut rng = StreamRng::with_stream(mean_seed, class_id.0 as u64);
        Self {
            class_id,
            mean: (0..dimension).map(|_| mean_stddev * rng.standard_normal()).collect(),
            stddev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Synthetic,
    File,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dimension: usize,
    /// `(class_id, sample_count)` in ascending class order.
    pub classes: Vec<(ClassId, usize)>,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dimension: usize,
    samples: Vec<Embedding>,
    by_class: BTreeMap<ClassId, Vec<usize>>,
    ground_truth: Option<BTreeMap<ClassId, Vec<f64>>>,
    source: Source,
}

impl EmbeddingStore {
    /// Builds a store from already-validated parts. Samples keep their order.
    pub fn from_samples(dimension: usize, samples: Vec<Embedding>, source: Source) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidValue("dimension must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(samples.len());
        let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        for (i, s) in samples.iter().enumerate() {
            if s.vector.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: s.vector.len(),
                });
            }
            if let Some(bad) = s.vector.iter().position(|v| !v.is_finite()) {
                return Err(Error::Value {
                    row: i as u64 + 1,
                    message: format!("non-finite coordinate f{bad}"),
                });
            }
            if !seen.insert(s.sample_id) {
                return Err(Error::DuplicateId(s.sample_id.0));
            }
            by_class.entry(s.true_class).or_default().push(i);
        }
        Ok(Self {
            dimension,
            samples,
            by_class,
            ground_truth: None,
            source,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file).map_err(|e| match e {
            Error::Csv { source, .. } => Error::csv(path, source),
            other => other,
        })
    }

    pub fn read_csv(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::csv("<input>", e))?.clone();
        let dimension = parse_header(&header)?;
        let width = dimension + 2;

        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            // data rows start at file line 2
            let row = i as u64 + 2;
            let rec = rec.map_err(|e| Error::csv("<input>", e))?;
            if rec.len() != width {
                return Err(Error::Format {
                    line: row,
                    message: format!("expected {width} columns, found {}", rec.len()),
                });
            }
            let class: u32 = rec[0].trim().parse().map_err(|_| Error::Value {
                row,
                message: format!("bad class_id {:?}", &rec[0]),
            })?;
            let id: u64 = rec[1].trim().parse().map_err(|_| Error::Value {
                row,
                message: format!("bad sample_id {:?}", &rec[1]),
            })?;
            let mut vector = Vec::with_capacity(dimension);
            for (j, field) in rec.iter().skip(2).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Value {
                    row,
                    message: format!("f{j} is not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Value {
                        row,
                        message: format!("f{j} is not finite: {field:?}"),
                    });
                }
                vector.push(v);
            }
            samples.push(Embedding {
                sample_id: SampleId(id),
                vector,
                true_class: ClassId(class),
            });
        }
        if samples.is_empty() {
            return Err(Error::EmptySet("csv has no data rows"));
        }
        Self::from_samples(dimension, samples, Source::File).map_err(|e| match e {
            // rows are 1-based over samples here; shift to file lines
            Error::Value { row, message } => Error::Value {
                row: row + 1,
                message,
            },
            other => other,
        })
    }

    /// Writes the canonical CSV form; `read_csv` of the output reproduces the store.
    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["class_id".to_string(), "sample_id".to_string()];
        header.extend((0..self.dimension).map(|j| format!("f{j}")));
        w.write_record(&header).map_err(|e| Error::csv("<output>", e))?;
        for s in &self.samples {
            let mut row = vec![s.true_class.to_string(), s.sample_id.to_string()];
            row.extend(s.vector.iter().map(|&v| fmt17(v)));
            w.write_record(&row).map_err(|e| Error::csv("<output>", e))?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }

    pub fn generate_synthetic(specs: &[ClassSpec], samples_per_class: usize, seed: u64) -> Result<Self> {
        let first = specs.first().ok_or(Error::EmptySet("no class specs"))?;
        if samples_per_class == 0 {
            return Err(Error::InvalidValue("samples_per_class must be positive".into()));
        }
        let dimension = first.mean.len();
        let mut ids = HashSet::new();
        for spec in specs {
            if spec.mean.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: spec.mean.len(),
                });
            }
            if !(spec.stddev > 0.0 && spec.stddev.is_finite()) {
                return Err(Error::InvalidValue(format!(
                    "class {} stddev must be positive, got {}",
                    spec.class_id, spec.stddev
                )));
            }
            if spec.mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!("class {} mean is not finite", spec.class_id)));
            }
            if !ids.insert(spec.class_id) {
                return Err(Error::InvalidValue(format!("class {} specified twice", spec.class_id)));
            }
        }

        let mut rng = StreamRng::from_seed(seed);
        let mut samples = Vec::with_capacity(specs.len() * samples_per_class);
        let mut next_id = 0u64;
        for spec in specs {
            for _ in 0..samples_per_class {
                let vector = spec
                    .mean
                    .iter()
                    .map(|&m| m + spec.stddev * rng.standard_normal())
                    .collect();
                samples.push(Embedding {
                    sample_id: SampleId(next_id),
                    vector,
                    true_class: spec.class_id,
                });
                next_id += 1;
            }
        }
        let mut store = Self::from_samples(dimension, samples, Source::Synthetic)?;
        store.ground_truth = Some(specs.iter().map(|s| (s.class_id, s.mean.clone())).collect());
        Ok(store)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn samples(&self) -> &[Embedding] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.by_class.keys().copied()
    }

    pub fn num_classes(&self) -> usize {
        self.by_class.len()
    }

    pub fn contains_class(&self, class: ClassId) -> bool {
        self.by_class.contains_key(&class)
    }

    /// Samples of one class in store order.
    pub fn class_samples(&self, class: ClassId) -> Option<impl Iterator<Item = &Embedding> + '_> {
        self.by_class
            .get(&class)
            .map(|idx| idx.iter().map(move |&i| &self.samples[i]))
    }

    pub(crate) fn class_indices(&self, class: ClassId) -> &[usize] {
        self.by_class.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn manifest(&self) -> DatasetManifest {
        DatasetManifest {
            dimension: self.dimension,
            classes: self.by_class.iter().map(|(&c, v)| (c, v.len())).collect(),
            source: self.source,
        }
    }

    /// Ground-truth class mean. `Ok(None)` for file-backed stores.
    pub fn true_mean(&self, class: ClassId) -> Result<Option<&[f64]>> {
        if !self.by_class.contains_key(&class) {
            return Err(Error::UnknownClass(class));
        }
        Ok(self
            .ground_truth
            .as_ref()
            .and_then(|gt| gt.get(&class))
            .map(Vec::as_slice))
    }
}

fn parse_header(header: &csv::StringRecord) -> Result<usize> {
    let bad = |message: String| Error::Format { line: 1, message };
    if header.len() < 3 {
        return Err(bad(format!("expected class_id,sample_id,f0,... but found {} columns", header.len())));
    }
    if header[0].trim() != "class_id" || header[1].trim() != "sample_id" {
        return Err(bad(format!(
            "header must start with class_id,sample_id, found {},{}",
            &header[0], &header[1]
        )));
    }
    for (j, name) in header.iter().skip(2).enumerate() {
        if name.trim() != format!("f{j}") {
            return Err(bad(format!("column {} should be f{j}, found {name:?}", j + 2)));
        }
    }
    Ok(header.len() - 2)
}
