//! N-way K-shot episodes drawn from an [`EmbeddingStore`].

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::store::EmbeddingStore;
use crate::types::{ClassId, Embedding};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeShape {
    pub n_way: usize,
    pub k_shot: usize,
    pub m_query: usize,
}

/// One task. Local class `c` maps to `class_map[c]`; support and query are
/// indexed by local class.
#[derive(Debug, Clone)]
pub struct Episode<'a> {
    pub batch_index: u64,
    pub class_map: Vec<ClassId>,
    pub support: Vec<Vec<&'a Embedding>>,
    pub query: Vec<Vec<&'a Embedding>>,
}

impl<'a> Episode<'a> {
    pub fn n_way(&self) -> usize {
        self.class_map.len()
    }

    /// Queries flattened in iteration order: local class ascending, then
    /// sampling order within the class.
    pub fn queries(&self) -> impl Iterator<Item = (usize, &'a Embedding)> + '_ {
        self.query
            .iter()
            .enumerate()
            .flat_map(|(c, qs)| qs.iter().map(move |&q| (c, q)))
    }
}

pub fn check_capacity(store: &EmbeddingStore, shape: EpisodeShape) -> Result<()> {
    if shape.n_way == 0 || shape.k_shot == 0 || shape.m_query == 0 {
        return Err(Error::InvalidValue("n_way, k_shot and m_query must be positive".into()));
    }
    if store.num_classes() < shape.n_way {
        return Err(Error::InsufficientClasses {
            required: shape.n_way,
            available: store.num_classes(),
        });
    }
    let required = shape.k_shot + shape.m_query;
    for class in store.class_ids() {
        let available = store.class_indices(class).len();
        if available < required {
            return Err(Error::Capacity {
                class,
                required,
                available,
            });
        }
    }
    Ok(())
}

/// Draws one episode. Classes are chosen uniformly without replacement, then
/// `K + M` samples per class without replacement; the first `K` drawn become
/// support.
pub fn sample_episode<'a>(
    store: &'a EmbeddingStore,
    shape: EpisodeShape,
    batch_index: u64,
    rng: &mut StreamRng,
) -> Result<Episode<'a>> {
    check_capacity(store, shape)?;
    let classes: Vec<ClassId> = store.class_ids().collect();
    let chosen = rng.choose_indices(classes.len(), shape.n_way);

    let mut class_map = Vec::with_capacity(shape.n_way);
    let mut support = Vec::with_capacity(shape.n_way);
    let mut query = Vec::with_capacity(shape.n_way);
    for ci in chosen {
        let class = classes[ci];
        let pool = store.class_indices(class);
        let picks = rng.choose_indices(pool.len(), shape.k_shot + shape.m_query);
        let mut members = picks.into_iter().map(|p| &store.samples()[pool[p]]);
        support.push(members.by_ref().take(shape.k_shot).collect());
        query.push(members.collect());
        class_map.push(class);
    }
    Ok(Episode {
        batch_index,
        class_map,
        support,
        query,
    })
}

/// Seeded stream of `count` episodes with `batch_index` running from `first_index`.
pub struct EpisodeStream<'a> {
    store: &'a EmbeddingStore,
    shape: EpisodeShape,
    rng: StreamRng,
    next_index: u64,
    end: u64,
}

impl<'a> EpisodeStream<'a> {
    pub fn new(store: &'a EmbeddingStore, shape: EpisodeShape, seed: u64, count: u64) -> Result<Self> {
        check_capacity(store, shape)?;
        Ok(Self {
            store,
            shape,
            rng: StreamRng::from_seed(seed),
            next_index: 0,
            end: count,
        })
    }

    /// Extends the stream by `more` episodes without reseeding.
    pub fn extend(&mut self, more: u64) {
        self.end += more;
    }
}

impl<'a> Iterator for EpisodeStream<'a> {
    type Item = Episode<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_index >= self.end {
            return None;
        }
        let ep = sample_episode(self.store, self.shape, self.next_index, &mut self.rng)
            .expect("capacity checked at construction");
        self.next_index += 1;
        Some(ep)
    }
}

pub fn episode_stream(
    store: &EmbeddingStore,
    shape: EpisodeShape,
    seed: u64,
    count: u64,
) -> Result<EpisodeStream<'_>> {
    EpisodeStream::new(store, shape, seed, count)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::store::ClassSpec;

    fn store(classes: u32, per_class: usize) -> EmbeddingStore {
        let specs: Vec<_> = (0..classes)
            .map(|c| ClassSpec {
                class_id: ClassId(c),
                mean: vec![c as f64, 0.0],
                stddev: 1.0,
            })
            .collect();
        EmbeddingStore::generate_synthetic(&specs, per_class, 1).unwrap()
    }

    const SHAPE: EpisodeShape = EpisodeShape {
        n_way: 5,
        k_shot: 1,
        m_query: 15,
    };

    #[test]
    fn covers_all_classes_when_n_equals_store() {
        let s = store(5, 20);
        let mut rng = StreamRng::from_seed(0);
        let ep = sample_episode(&s, SHAPE, 0, &mut rng).unwrap();
        let got: HashSet<_> = ep.class_map.iter().copied().collect();
        assert_eq!(got.len(), 5);
    }

    #[test]
    fn capacity_error_names_class() {
        let s = store(5, 15);
        let mut rng = StreamRng::from_seed(0);
        match sample_episode(&s, SHAPE, 0, &mut rng) {
            Err(Error::Capacity {
                required, available, ..
            }) => assert_eq!((required, available), (16, 15)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            sample_episode(&store(4, 30), SHAPE, 0, &mut rng),
            Err(Error::InsufficientClasses { .. })
        ));
    }

    #[test]
    fn disjoint_and_sized() {
        let s = store(8, 40);
        for ep in episode_stream(&s, SHAPE, 3, 50).unwrap() {
            let sup: HashSet<_> = ep.support.iter().flatten().map(|e| e.sample_id).collect();
            let qry: HashSet<_> = ep.query.iter().flatten().map(|e| e.sample_id).collect();
            assert!(sup.is_disjoint(&qry));
            assert!(ep.support.iter().all(|v| v.len() == 1));
            assert!(ep.query.iter().all(|v| v.len() == 15));
            for (c, class) in ep.class_map.iter().enumerate() {
                assert!(ep.support[c].iter().chain(&ep.query[c]).all(|e| e.true_class == *class));
            }
        }
    }

    #[test]
    fn stream_reproducible_and_varied() {
        let s = store(10, 30);
        let ids = |seed| -> Vec<Vec<u64>> {
            episode_stream(&s, SHAPE, seed, 20)
                .unwrap()
                .map(|ep| {
                    let mut v: Vec<u64> = ep
                        .support
                        .iter()
                        .chain(&ep.query)
                        .flatten()
                        .map(|e| e.sample_id.0)
                        .collect();
                    v.sort_unstable();
                    v
                })
                .collect()
        };
        let a = ids(5);
        assert_eq!(a, ids(5));
        assert_ne!(a[0], a[1]);
        assert_ne!(a, ids(6));
    }

    #[test]
    fn empty_stream_and_indices() {
        let s = store(5, 20);
        assert_eq!(episode_stream(&s, SHAPE, 1, 0).unwrap().count(), 0);
        let idx: Vec<u64> = episode_stream(&s, SHAPE, 1, 4).unwrap().map(|e| e.batch_index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
}
