//! From harvested records to publications and the co-authorships they induce.

mod ddc;
mod name;

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use ddc::{extract_ddc, DdcClass, DdcLevel, DdcPatterns, InvalidDdc, PatternError};
pub use name::{normalize_author_name, CanonicalName, EmptyName};

use crate::oai::OaiRecord;

/// The graph-relevant view of one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub record_id: String,
    /// Distinct by canonical form, in first-seen order.
    pub authors: Vec<CanonicalName>,
    #[serde(rename = "ddc")]
    pub ddc_classes: BTreeSet<DdcClass>,
    pub datestamp: DateTime<Utc>,
}

impl Publication {
    pub fn new(
        record_id: impl Into<String>,
        raw_authors: impl IntoIterator<Item = impl AsRef<str>>,
        ddc_classes: impl IntoIterator<Item = DdcClass>,
        datestamp: DateTime<Utc>,
    ) -> Self {
        let mut seen = BTreeSet::new();
        let authors = raw_authors
            .into_iter()
            .filter_map(|raw| normalize_author_name(raw.as_ref()).ok())
            .filter(|name| seen.insert(name.canonical().to_string()))
            .collect();
        Publication {
            record_id: record_id.into(),
            authors,
            ddc_classes: ddc_classes.into_iter().collect(),
            datestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extracted {
    Publication(Publication),
    /// The repository reports the record as deleted.
    Deletion(String),
}

pub fn extract_publication(record: &OaiRecord) -> Extracted {
    extract_with(record, &DdcPatterns::default())
}

pub fn extract_with(record: &OaiRecord, patterns: &DdcPatterns) -> Extracted {
    if record.deleted {
        return Extracted::Deletion(record.identifier.clone());
    }
    Extracted::Publication(Publication::new(
        record.identifier.clone(),
        record.creators(),
        patterns.extract(record),
        record.datestamp,
    ))
}

/// Unordered author pair keyed by canonical name; `.0 < .1` always holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AuthorPair(pub String, pub String);

impl AuthorPair {
    pub fn new(a: &str, b: &str) -> Option<Self> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(AuthorPair(a.into(), b.into())),
            std::cmp::Ordering::Greater => Some(AuthorPair(b.into(), a.into())),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// All unordered pairs of distinct authors.
pub fn coauthor_pairs(publication: &Publication) -> BTreeSet<AuthorPair> {
    coauthor_pairs_capped(publication, usize::MAX)
}

/// Pairs among the first `cap` authors only.
pub fn coauthor_pairs_capped(publication: &Publication, cap: usize) -> BTreeSet<AuthorPair> {
    let authors = &publication.authors[..publication.authors.len().min(cap)];
    let mut pairs = BTreeSet::new();
    for (i, a) in authors.iter().enumerate() {
        for b in &authors[i + 1..] {
            pairs.extend(AuthorPair::new(a.canonical(), b.canonical()));
        }
    }
    pairs
}
