//! Experiment config files (JSON).
//!
//! ```json
//! {
//!   "dataset": { "synthetic": { "dimension": 2, "samples_per_class": 50, "seed": 1,
//!                "classes": [ { "id": 0, "mean": [0, 0], "stddev": 1 },
//!                             { "id": 1, "mean_seed": 42, "mean_stddev": 2, "stddev": 1 } ] } },
//!   "run": { "mode": "ipec", "n_way": 2, "k_shot": 1, "m_query": 15,
//!            "test_batches": 100, "seed": 7 },
//!   "sweep": { "strategy": ["ADD", "REPLACE", "REMOVE"], "seeds": [1, 2] }
//! }
//! ```
//!
//! `dataset` holds exactly one of `synthetic` or `file: { "path": ... }`.
//! Each `sweep` list replaces the matching `run` field; runs are the cross
//! product of all lists.

use std::path::{Path, PathBuf};

use anyhow::Context;
use ipec::{ClassId, ClassSpec, EmbeddingStore, Mode, RunConfig, Strategy, Thresholds};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSection {
    Synthetic(SyntheticDataset),
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDataset {
    pub dimension: usize,
    pub classes: Vec<SyntheticClass>,
    pub samples_per_class: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticClass {
    pub id: u32,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    #[serde(default)]
    pub mean_seed: Option<u64>,
    #[serde(default = "one")]
    pub mean_stddev: f64,
    pub stddev: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub thresholds: Option<Vec<Thresholds>>,
    #[serde(default)]
    pub strategy: Option<Vec<Strategy>>,
    #[serde(default)]
    pub k_shot: Option<Vec<usize>>,
    /// `null` entries mean "no shot removal".
    #[serde(default)]
    pub shot_removal_k: Option<Vec<Option<u64>>>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

/// Command-line overrides. Each one that is set also drops the matching sweep axis.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub strategy: Option<Strategy>,
    pub tau: Option<f64>,
    pub tau_prime: Option<f64>,
    pub warmup: Option<u64>,
    pub batches: Option<u64>,
}

/// Config problems that should map to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    /// Parse errors carry serde_json's `line N column M` anchor.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let DatasetSection::Synthetic(s) = &self.dataset {
            for c in &s.classes {
                match (&c.mean, c.mean_seed) {
                    (Some(m), None) if m.len() != s.dimension => {
                        return Err(ConfigError(format!(
                            "class {}: mean has {} coordinates, dimension is {}",
                            c.id,
                            m.len(),
                            s.dimension
                        )))
                    }
                    (Some(_), None) | (None, Some(_)) => {}
                    _ => {
                        return Err(ConfigError(format!(
                            "class {}: give exactly one of mean or mean_seed",
                            c.id
                        )))
                    }
                }
            }
        }
        let sweep = &self.sweep;
        let empty = [
            sweep.thresholds.as_ref().map(Vec::is_empty),
            sweep.strategy.as_ref().map(Vec::is_empty),
            sweep.k_shot.as_ref().map(Vec::is_empty),
            sweep.shot_removal_k.as_ref().map(Vec::is_empty),
            sweep.seeds.as_ref().map(Vec::is_empty),
        ];
        if empty.contains(&Some(true)) {
            return Err(ConfigError("sweep lists must not be empty".into()));
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let run = &mut self.run;
        if let Some(v) = o.seed {
            run.seed = v;
            self.sweep.seeds = None;
        }
        if let Some(v) = o.mode {
            run.mode = v;
        }
        if let Some(v) = o.strategy {
            run.strategy = v;
            self.sweep.strategy = None;
        }
        if let Some(v) = o.tau {
            run.thresholds.tau = v;
            self.sweep.thresholds = None;
        }
        if let Some(v) = o.tau_prime {
            run.thresholds.tau_prime = v;
            self.sweep.thresholds = None;
        }
        if let Some(v) = o.warmup {
            run.warmup_batches = v;
        }
        if let Some(v) = o.batches {
            run.test_batches = v;
        }
    }

    /// All effective run configs, validated. Order: thresholds, strategy,
    /// k_shot, shot_removal_k, seed (last axis varies fastest).
    pub fn expand(&self) -> Result<Vec<RunConfig>, ConfigError> {
        let s = &self.sweep;
        let base = &self.run;
        let thresholds = s.thresholds.clone().unwrap_or_else(|| vec![base.thresholds]);
        let strategies = s.strategy.clone().unwrap_or_else(|| vec![base.strategy]);
        let shots = s.k_shot.clone().unwrap_or_else(|| vec![base.k_shot]);
        let removal = s.shot_removal_k.clone().unwrap_or_else(|| vec![base.shot_removal_k]);
        let seeds = s.seeds.clone().unwrap_or_else(|| vec![base.seed]);

        let mut out = Vec::new();
        for &t in &thresholds {
            for &strategy in &strategies {
                for &k_shot in &shots {
                    for &shot_removal_k in &removal {
                        for &seed in &seeds {
                            let cfg = RunConfig {
                                thresholds: t,
                                strategy,
                                k_shot,
                                shot_removal_k,
                                seed,
                                ..base.clone()
                            };
                            cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn build_store(&self, base_dir: &Path) -> anyhow::Result<EmbeddingStore> {
        match &self.dataset {
            DatasetSection::File { path } => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                EmbeddingStore::load_csv(&path).with_context(|| format!("loading {}", path.display()))
            }
            DatasetSection::Synthetic(s) => {
                let specs: Vec<ClassSpec> = s
                    .classes
                    .iter()
                    .map(|c| match (&c.mean, c.mean_seed) {
                        (Some(mean), _) => ClassSpec {
                            class_id: ClassId(c.id),
                            mean: mean.clone(),
                            stddev: c.stddev,
                        },
                        (None, Some(seed)) => {
                            ClassSpec::from_mean_seed(ClassId(c.id), s.dimension, seed, c.mean_stddev, c.stddev)
                        }
                        (None, None) => unreachable!("validated"),
                    })
                    .collect();
                Ok(EmbeddingStore::generate_synthetic(&specs, s.samples_per_class, s.seed)?)
            }
        }
    }
}

/// Directory name for a run: mode plus a digest of the effective config.
pub fn run_label(config: &RunConfig) -> String {
    format!("{}-{}", config.mode, ipec::evaluation::config_digest(config))
}
