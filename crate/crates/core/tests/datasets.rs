use std::io::Write;

use ipec::episode::{episode_stream, EpisodeShape};
use ipec::rng::StreamRng;
use ipec::{ClassId, ClassSpec, EmbeddingStore, Error};

fn twenty_class_store(per_class: usize) -> EmbeddingStore {
    let specs: Vec<ClassSpec> = (0..20)
        .map(|c| ClassSpec {
            class_id: ClassId(c),
            mean: vec![c as f64; 3],
            stddev: 1.0,
        })
        .collect();
    EmbeddingStore::generate_synthetic(&specs, per_class, 1).unwrap()
}

#[test]
fn class_selection_is_uniform() {
    let store = twenty_class_store(20);
    let shape = EpisodeShape {
        n_way: 5,
        k_shot: 1,
        m_query: 15,
    };
    let mut counts = [0u64; 20];
    for ep in episode_stream(&store, shape, 2024, 10_000).unwrap() {
        for c in ep.class_map {
            counts[c.0 as usize] += 1;
        }
    }
    let expected = 10_000.0 * 5.0 / 20.0;
    let chi2: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    // upper 0.001 quantile of chi-square with 19 degrees of freedom
    assert!(chi2 < 43.82, "chi2 = {chi2}, counts = {counts:?}");
}

// Rows laid out the way the embedding exporter writes them: classes in
// alphabetical folder order, sample ids assigned sequentially.
fn exporter_style_csv(classes: u32, per_class: u32, dim: usize) -> (tempfile::NamedTempFile, Vec<(ClassId, usize)>) {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    let header: Vec<String> = ["class_id".to_string(), "sample_id".to_string()]
        .into_iter()
        .chain((0..dim).map(|j| format!("f{j}")))
        .collect();
    writeln!(f, "{}", header.join(",")).unwrap();
    let mut rng = StreamRng::from_seed(3);
    let mut id = 0;
    for c in 0..classes {
        for _ in 0..per_class {
            let feats: Vec<String> = (0..dim).map(|_| format!("{}", rng.standard_normal() as f32)).collect();
            writeln!(f, "{c},{id},{}", feats.join(",")).unwrap();
            id += 1;
        }
    }
    f.flush().unwrap();
    let summary = (0..classes).map(|c| (ClassId(c), per_class as usize)).collect();
    (f, summary)
}

#[test]
fn exporter_output_loads_with_matching_manifest() {
    let (file, summary) = exporter_style_csv(20, 30, 16);
    let store = EmbeddingStore::load_csv(file.path()).unwrap();
    let manifest = store.manifest();
    assert_eq!(manifest.dimension, 16);
    assert_eq!(manifest.classes, summary);
    assert_eq!(store.len(), 600);
}

#[test]
fn write_then_load_is_identity() {
    let store = twenty_class_store(7);
    let mut f = tempfile::NamedTempFile::new().unwrap();
    store.write_csv(&mut f).unwrap();
    let back = EmbeddingStore::load_csv(f.path()).unwrap();
    assert_eq!(back.samples(), store.samples());
    let mut again = Vec::new();
    back.write_csv(&mut again).unwrap();
    assert_eq!(std::fs::read(f.path()).unwrap(), again);
}

#[test]
fn missing_file_reports_path() {
    let err = EmbeddingStore::load_csv("/nonexistent/embeddings.csv").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/embeddings.csv"));
}
