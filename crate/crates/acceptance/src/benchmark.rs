//! The reference synthetic benchmark: 20 isotropic Gaussian classes in 64
//! dimensions, means from `N(0, 4 I)`, unit spread, 500 samples per class,
//! 5-way episodes with 15 queries per class, seed 42.

use std::sync::OnceLock;

use ipec::{ClassId, ClassSpec, EmbeddingStore, Metric, Mode, RunConfig, Strategy, Thresholds};

pub const DIMENSION: usize = 64;
pub const CLASSES: u32 = 20;
pub const MEAN_STDDEV: f64 = 2.0;
pub const CLASS_STDDEV: f64 = 1.0;
pub const SAMPLES_PER_CLASS: usize = 500;
pub const N_WAY: usize = 5;
pub const M_QUERY: usize = 15;
pub const SEED: u64 = 42;

pub fn class_specs() -> Vec<ClassSpec> {
    (0..CLASSES)
        .map(|c| ClassSpec::from_mean_seed(ClassId(c), DIMENSION, SEED, MEAN_STDDEV, CLASS_STDDEV))
        .collect()
}

pub fn store() -> &'static EmbeddingStore {
    static STORE: OnceLock<EmbeddingStore> = OnceLock::new();
    STORE.get_or_init(|| {
        EmbeddingStore::generate_synthetic(&class_specs(), SAMPLES_PER_CLASS, SEED)
            .expect("reference benchmark parameters are valid")
    })
}

/// Benchmark run with τ = τ′ = 0.5 and REMOVE unless overridden by the caller.
pub fn config(mode: Mode, k_shot: usize, test_batches: u64, seed: u64) -> RunConfig {
    RunConfig {
        mode,
        n_way: N_WAY,
        k_shot,
        m_query: M_QUERY,
        metric: Metric::Euclidean,
        thresholds: Thresholds {
            tau: 0.5,
            tau_prime: 0.5,
        },
        strategy: Strategy::Remove,
        warmup_batches: 0,
        test_batches,
        seed,
        shot_removal_k: None,
    }
}
