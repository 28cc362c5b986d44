//! The co-author index: publications as the source of truth, plus the
//! co-authorship graphs derived from them for every partition.

mod graph;
mod partition;
mod snapshot;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use tracing::warn;

pub use graph::{CoauthorGraph, IngestDelta};
pub use partition::{PartitionError, PartitionKey, PartitionKind};
pub use snapshot::{fnv1a64, load, save, IndexSnapshot, SnapshotError, FORMAT_VERSION};

use crate::extract::{coauthor_pairs_capped, DdcClass, Publication};

/// Publications with more authors than this only pair up their first
/// `DEFAULT_MAX_PAIR_AUTHORS` authors.
pub const DEFAULT_MAX_PAIR_AUTHORS: usize = 50;

/// Builds the graph of a partition from scratch.
pub fn build_graph<'a>(
    publications: impl IntoIterator<Item = &'a Publication>,
    key: &PartitionKey,
    max_pair_authors: usize,
) -> CoauthorGraph {
    let mut g = CoauthorGraph::new();
    for p in publications.into_iter().filter(|p| key.contains(p)) {
        g.add_publication(&p.authors, &coauthor_pairs_capped(p, max_pair_authors));
    }
    g
}

/// Publications of one repository and their co-authorship graphs.
///
/// The repository-wide graph is maintained incrementally; DDC partitions are
/// built on first request and memoized until a write touches them. Cloning is
/// cheap enough to hand out point-in-time copies to readers.
#[derive(Debug)]
pub struct CoauthorIndex {
    repository_id: String,
    publications: BTreeMap<String, Publication>,
    repository_wide: Arc<CoauthorGraph>,
    generation: u64,
    max_pair_authors: usize,
    capped_publications: u64,
    built_at: DateTime<Utc>,
    partitions: Mutex<HashMap<PartitionKey, Arc<CoauthorGraph>>>,
}

impl Clone for CoauthorIndex {
    fn clone(&self) -> Self {
        CoauthorIndex {
            repository_id: self.repository_id.clone(),
            publications: self.publications.clone(),
            repository_wide: Arc::clone(&self.repository_wide),
            generation: self.generation,
            max_pair_authors: self.max_pair_authors,
            capped_publications: self.capped_publications,
            built_at: self.built_at,
            partitions: Mutex::new(self.partitions.lock().expect("cache lock").clone()),
        }
    }
}

impl CoauthorIndex {
    pub fn new(repository_id: impl Into<String>) -> Self {
        CoauthorIndex {
            repository_id: repository_id.into(),
            publications: BTreeMap::new(),
            repository_wide: Arc::new(CoauthorGraph::new()),
            generation: 0,
            max_pair_authors: DEFAULT_MAX_PAIR_AUTHORS,
            capped_publications: 0,
            built_at: Utc::now(),
            partitions: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_max_pair_authors(mut self, cap: usize) -> Self {
        assert!(self.publications.is_empty(), "set the cap before ingesting");
        self.max_pair_authors = cap.max(2);
        self
    }

    pub fn repository_id(&self) -> &str {
        &self.repository_id
    }

    /// Increments on every change to the publication set.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn max_pair_authors(&self) -> usize {
        self.max_pair_authors
    }

    /// Number of ingested publications whose pair expansion was truncated.
    pub fn capped_publications(&self) -> u64 {
        self.capped_publications
    }

    pub fn built_at(&self) -> DateTime<Utc> {
        self.built_at
    }

    pub fn publications(&self) -> &BTreeMap<String, Publication> {
        &self.publications
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    /// DDC codes present in at least one publication.
    pub fn ddc_classes(&self) -> std::collections::BTreeSet<DdcClass> {
        self.publications
            .values()
            .flat_map(|p| p.ddc_classes.iter().copied())
            .collect()
    }

    fn invalidate(&mut self, publication: &Publication) {
        let cache = self.partitions.get_mut().expect("cache lock");
        for key in PartitionKey::ddc_partitions_of(publication) {
            cache.remove(&key);
        }
    }

    /// Inserts or replaces a publication, keyed by record id.
    pub fn ingest(&mut self, publication: Publication) -> IngestDelta {
        if self.publications.get(&publication.record_id) == Some(&publication) {
            return IngestDelta::default();
        }
        self.retract(&publication.record_id);
        let cap = self.max_pair_authors;
        if publication.authors.len() > cap {
            self.capped_publications += 1;
            warn!(
                record = %publication.record_id,
                authors = publication.authors.len(),
                cap,
                "pair expansion truncated"
            );
        }
        let pairs = coauthor_pairs_capped(&publication, cap);
        let delta = Arc::make_mut(&mut self.repository_wide).add_publication(&publication.authors, &pairs);
        self.invalidate(&publication);
        self.generation += 1;
        self.built_at = Utc::now();
        self.publications.insert(publication.record_id.clone(), publication);
        delta
    }

    /// Removes a publication's contribution; `false` if it was never ingested.
    pub fn retract(&mut self, record_id: &str) -> bool {
        let Some(old) = self.publications.remove(record_id) else {
            return false;
        };
        if old.authors.len() > self.max_pair_authors {
            self.capped_publications -= 1;
        }
        let pairs = coauthor_pairs_capped(&old, self.max_pair_authors);
        Arc::make_mut(&mut self.repository_wide).remove_publication(&old.authors, &pairs);
        self.invalidate(&old);
        self.generation += 1;
        self.built_at = Utc::now();
        true
    }

    /// The graph of one partition; empty if nothing was ingested into it.
    pub fn subgraph(&self, key: &PartitionKey) -> Arc<CoauthorGraph> {
        if *key == PartitionKey::RepositoryWide {
            return Arc::clone(&self.repository_wide);
        }
        let mut cache = self.partitions.lock().expect("cache lock");
        Arc::clone(cache.entry(*key).or_insert_with(|| {
            Arc::new(build_graph(
                self.publications.values(),
                key,
                self.max_pair_authors,
            ))
        }))
    }

    pub fn snapshot(&self) -> IndexSnapshot {
        IndexSnapshot {
            repository_id: self.repository_id.clone(),
            publications: self.publications.clone(),
            built_at: self.built_at,
            format_version: FORMAT_VERSION,
        }
    }

    pub fn from_snapshot(snapshot: IndexSnapshot) -> Self {
        let mut index = CoauthorIndex::new(snapshot.repository_id);
        for publication in snapshot.publications.into_values() {
            index.ingest(publication);
        }
        index.built_at = snapshot.built_at;
        index
    }
}
