use tracing::debug;

use crate::extract::{extract_with, DdcPatterns, Extracted};
use crate::index::CoauthorIndex;
use crate::oai::{HarvestError, HarvestOutcome, Harvester, JobHandle, OaiRecord, RecordSink, RepositoryConfig};

/// Feeds harvested records into an index and hands a copy of the index to
/// `publish` after each complete page, so readers only ever see whole pages.
pub struct IndexingSink<'a, F> {
    index: &'a mut CoauthorIndex,
    patterns: DdcPatterns,
    job: &'a JobHandle,
    publish: F,
    /// Records that carried no usable author name.
    pub skipped: u64,
}

impl<'a, F: FnMut(&CoauthorIndex)> IndexingSink<'a, F> {
    pub fn new(index: &'a mut CoauthorIndex, job: &'a JobHandle, publish: F) -> Self {
        IndexingSink {
            index,
            patterns: DdcPatterns::default(),
            job,
            publish,
            skipped: 0,
        }
    }
}

impl<F: FnMut(&CoauthorIndex)> RecordSink for IndexingSink<'_, F> {
    fn record(&mut self, record: OaiRecord) {
        match extract_with(&record, &self.patterns) {
            Extracted::Publication(p) if p.authors.is_empty() => {
                debug!(id = %p.record_id, "record has no authors, skipped");
                // An earlier version of the record may have had authors.
                self.index.retract(&p.record_id);
                self.skipped += 1;
                return;
            }
            Extracted::Publication(p) => {
                self.index.ingest(p);
            }
            Extracted::Deletion(id) => {
                self.index.retract(&id);
            }
        }
        self.job.update(|j| j.records_ingested += 1);
    }

    fn page_complete(&mut self, _next_token: Option<&str>) {
        (self.publish)(self.index);
    }
}

/// Harvests `config` into `index`. Deleted records are retracted; records
/// without authors are skipped and not counted as ingested.
pub async fn harvest_into_index(
    harvester: &Harvester,
    config: &RepositoryConfig,
    job: &JobHandle,
    index: &mut CoauthorIndex,
    publish: impl FnMut(&CoauthorIndex),
) -> Result<HarvestOutcome, HarvestError> {
    let mut sink = IndexingSink::new(index, job, publish);
    harvester.harvest(config, job, &mut sink).await
}
