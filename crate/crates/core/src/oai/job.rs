use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::config::RepositoryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Running,
    Completed,
    Failed,
    Cancelled,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Completed | JobState::Failed | JobState::Cancelled)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("illegal job transition {from:?} -> {to:?}")]
pub struct InvalidTransition {
    pub from: JobState,
    pub to: JobState,
}

/// Progress and outcome of one harvest run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestJob {
    pub job_id: String,
    pub repository_id: String,
    pub repository: RepositoryConfig,
    pub state: JobState,
    pub records_received: u64,
    pub records_ingested: u64,
    pub last_resumption_token: Option<String>,
    pub error: Option<String>,
    pub created_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
}

impl HarvestJob {
    pub fn new(repository_id: impl Into<String>, repository: RepositoryConfig) -> Self {
        HarvestJob {
            job_id: new_job_id(),
            repository_id: repository_id.into(),
            repository,
            state: JobState::Pending,
            records_received: 0,
            records_ingested: 0,
            last_resumption_token: None,
            error: None,
            created_at: Utc::now(),
            finished_at: None,
        }
    }

    /// A fresh pending job that continues where `interrupted` stopped.
    ///
    /// Counters carry over so totals describe the whole logical harvest.
    pub fn resume_from(interrupted: &HarvestJob) -> Self {
        HarvestJob {
            last_resumption_token: interrupted.last_resumption_token.clone(),
            records_received: interrupted.records_received,
            records_ingested: interrupted.records_ingested,
            ..HarvestJob::new(interrupted.repository_id.clone(), interrupted.repository.clone())
        }
    }

    fn transition(&mut self, to: JobState) -> Result<(), InvalidTransition> {
        let ok = matches!(
            (self.state, to),
            (JobState::Pending, JobState::Running)
                | (JobState::Running, JobState::Completed)
                | (JobState::Running, JobState::Failed)
                | (JobState::Running, JobState::Cancelled)
        );
        if !ok {
            return Err(InvalidTransition { from: self.state, to });
        }
        self.state = to;
        if to.is_terminal() {
            self.finished_at = Some(Utc::now());
        }
        Ok(())
    }

    pub fn start(&mut self) -> Result<(), InvalidTransition> {
        self.transition(JobState::Running)
    }

    pub fn complete(&mut self) -> Result<(), InvalidTransition> {
        self.transition(JobState::Completed)
    }

    pub fn cancel(&mut self) -> Result<(), InvalidTransition> {
        self.transition(JobState::Cancelled)
    }

    pub fn fail(&mut self, message: impl Into<String>) -> Result<(), InvalidTransition> {
        self.transition(JobState::Failed)?;
        self.error = Some(message.into());
        Ok(())
    }
}

fn new_job_id() -> String {
    format!("job-{}", uuid::Uuid::new_v4().simple())
}

/// Shared, concurrently readable view of a running job.
#[derive(Debug, Clone)]
pub struct JobHandle {
    job: Arc<RwLock<HarvestJob>>,
    cancel: Arc<AtomicBool>,
}

impl JobHandle {
    pub fn new(job: HarvestJob) -> Self {
        JobHandle {
            job: Arc::new(RwLock::new(job)),
            cancel: Arc::new(AtomicBool::new(false)),
        }
    }

    pub fn snapshot(&self) -> HarvestJob {
        self.job.read().expect("job lock poisoned").clone()
    }

    pub fn id(&self) -> String {
        self.job.read().expect("job lock poisoned").job_id.clone()
    }

    pub fn state(&self) -> JobState {
        self.job.read().expect("job lock poisoned").state
    }

    pub fn update<R>(&self, f: impl FnOnce(&mut HarvestJob) -> R) -> R {
        f(&mut self.job.write().expect("job lock poisoned"))
    }

    /// Asks the harvester to stop at the next page boundary.
    pub fn request_cancel(&self) {
        self.cancel.store(true, Ordering::SeqCst);
    }

    pub fn cancel_requested(&self) -> bool {
        self.cancel.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job() -> HarvestJob {
        HarvestJob::new("r", RepositoryConfig::new("http://x.org/oai"))
    }

    #[test]
    fn legal_transitions() {
        let mut j = job();
        j.start().unwrap();
        j.fail("boom").unwrap();
        assert_eq!(j.state, JobState::Failed);
        assert_eq!(j.error.as_deref(), Some("boom"));
        assert!(j.finished_at.is_some());
    }

    #[test]
    fn illegal_transitions() {
        let mut j = job();
        assert!(j.complete().is_err());
        j.start().unwrap();
        assert!(j.start().is_err());
        j.complete().unwrap();
        assert_eq!(
            j.cancel(),
            Err(InvalidTransition {
                from: JobState::Completed,
                to: JobState::Cancelled
            })
        );
    }

    #[test]
    fn resume_keeps_token_and_counts() {
        let mut j = job();
        j.start().unwrap();
        j.records_received = 10;
        j.records_ingested = 9;
        j.last_resumption_token = Some("page-1".into());
        j.cancel().unwrap();
        let r = HarvestJob::resume_from(&j);
        assert_eq!(r.state, JobState::Pending);
        assert_ne!(r.job_id, j.job_id);
        assert_eq!(r.last_resumption_token.as_deref(), Some("page-1"));
        assert_eq!((r.records_received, r.records_ingested), (10, 9));
    }
}
