use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use reqwest::header::{HeaderMap, RETRY_AFTER, USER_AGENT};
use reqwest::StatusCode;
use tokio::time::{sleep_until, Instant};
use tracing::{debug, info, warn};
use url::Url;

use super::config::RepositoryConfig;
use super::job::{JobHandle, JobState};
use super::parse::{parse_identify, parse_list_records};
use super::record::{OaiRecord, RepositoryInfo};
use super::HarvestError;

pub const DEFAULT_USER_AGENT: &str =
    concat!("coauthor-net/", env!("CARGO_PKG_VERSION"), " (OAI-PMH harvester)");

/// Backoff schedule for transport failures and 5xx responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            initial_backoff: Duration::from_secs(1),
            max_backoff: Duration::from_secs(64),
        }
    }
}

impl RetryPolicy {
    /// Wait before retry number `failure` (1-based).
    pub fn backoff(&self, failure: u32) -> Duration {
        let factor = 1u32.checked_shl(failure.saturating_sub(1)).unwrap_or(u32::MAX);
        self.initial_backoff
            .checked_mul(factor)
            .unwrap_or(self.max_backoff)
            .min(self.max_backoff)
    }
}

/// Receives harvested records in arrival order.
pub trait RecordSink {
    fn record(&mut self, record: OaiRecord);

    /// Called after every page has been fully delivered, with the token that
    /// will fetch the next page (`None` after the final page).
    fn page_complete(&mut self, _next_token: Option<&str>) {}
}

impl<F: FnMut(OaiRecord)> RecordSink for F {
    fn record(&mut self, record: OaiRecord) {
        self(record)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarvestOutcome {
    pub state: JobState,
    pub pages: u32,
    pub records: u64,
}

/// Sequential OAI-PMH client; one request in flight at a time.
#[derive(Debug, Clone)]
pub struct Harvester {
    client: reqwest::Client,
    retry: RetryPolicy,
    user_agent: String,
    pacer: Arc<Pacer>,
}

impl Default for Harvester {
    fn default() -> Self {
        Harvester::new()
    }
}

/// Keeps requests to one repository `polite_delay_ms` apart, measured from
/// the end of one response to the start of the next request. Shared by all
/// jobs of a harvester, so a resumed job is paced against its predecessor.
#[derive(Debug, Default)]
struct Pacer {
    finished: Mutex<HashMap<String, Instant>>,
}

impl Pacer {
    async fn wait(&self, repository: &str, delay: Duration) {
        let last = self.finished.lock().expect("pacer lock").get(repository).copied();
        if let Some(last) = last {
            sleep_until(last + delay).await;
        }
    }

    fn finished(&self, repository: &str) {
        self.finished
            .lock()
            .expect("pacer lock")
            .insert(repository.to_string(), Instant::now());
    }
}

impl Harvester {
    pub fn new() -> Self {
        Harvester::with_retry_policy(RetryPolicy::default())
    }

    pub fn with_retry_policy(retry: RetryPolicy) -> Self {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .expect("HTTP client construction");
        Harvester {
            client,
            retry,
            user_agent: DEFAULT_USER_AGENT.to_string(),
            pacer: Arc::default(),
        }
    }

    pub fn user_agent(mut self, ua: impl Into<String>) -> Self {
        self.user_agent = ua.into();
        self
    }

    pub async fn identify(&self, config: &RepositoryConfig) -> Result<RepositoryInfo, HarvestError> {
        config.validate()?;
        let mut url = config.url()?;
        url.query_pairs_mut().append_pair("verb", "Identify");
        let body = self.fetch(&url, config).await?;
        parse_identify(&body)
    }

    /// Runs `ListRecords` to completion, feeding every record to `sink`.
    ///
    /// The job must be pending. If it carries a `last_resumption_token`
    /// harvesting continues from that token instead of starting over. The job
    /// stops early, in state `cancelled`, when cancellation was requested
    /// through its handle; the token needed to resume is kept on the job.
    pub async fn harvest(
        &self,
        config: &RepositoryConfig,
        job: &JobHandle,
        sink: &mut impl RecordSink,
    ) -> Result<HarvestOutcome, HarvestError> {
        config.validate()?;
        job.update(|j| j.start())?;
        let result = self.run(config, job, sink).await;
        match &result {
            Ok(outcome) => job.update(|j| match outcome.state {
                JobState::Cancelled => j.cancel(),
                _ => j.complete(),
            })?,
            Err(e) => job.update(|j| j.fail(e.to_string()))?,
        }
        result
    }

    async fn run(
        &self,
        config: &RepositoryConfig,
        job: &JobHandle,
        sink: &mut impl RecordSink,
    ) -> Result<HarvestOutcome, HarvestError> {
        let mut token = job.snapshot().last_resumption_token;
        let mut restarted = false;
        let mut seen: HashSet<(String, DateTime<Utc>)> = HashSet::new();
        let mut outcome = HarvestOutcome {
            state: JobState::Running,
            pages: 0,
            records: 0,
        };

        loop {
            let url = list_records_url(config, token.as_deref())?;
            let body = self.fetch(&url, config).await?;
            let page = match parse_list_records(&body) {
                Ok(page) => page,
                Err(HarvestError::Oai { code, .. }) if code == "noRecordsMatch" => {
                    info!(url = %url, "repository reports noRecordsMatch");
                    outcome.state = JobState::Completed;
                    sink.page_complete(None);
                    job.update(|j| j.last_resumption_token = None);
                    return Ok(outcome);
                }
                Err(HarvestError::Oai { code, message }) if code == "badResumptionToken" => {
                    if restarted || token.is_none() {
                        return Err(HarvestError::BadResumptionToken(message));
                    }
                    warn!(token = ?token, "resumption token rejected, restarting harvest");
                    restarted = true;
                    token = None;
                    continue;
                }
                Err(e) => return Err(e),
            };
            outcome.pages += 1;
            let delivered = page.records.len();
            for record in page.records {
                if !seen.insert((record.identifier.clone(), record.datestamp)) {
                    debug!(id = %record.identifier, "skipping record already delivered");
                    continue;
                }
                outcome.records += 1;
                job.update(|j| j.records_received += 1);
                sink.record(record);
            }
            token = page.resumption_token;
            job.update(|j| j.last_resumption_token = token.clone());
            sink.page_complete(token.as_deref());
            debug!(records = delivered, next = ?token, "page harvested");

            if token.is_none() {
                outcome.state = JobState::Completed;
                return Ok(outcome);
            }
            if job.cancel_requested() {
                outcome.state = JobState::Cancelled;
                return Ok(outcome);
            }
        }
    }

    async fn fetch(
        &self,
        url: &Url,
        config: &RepositoryConfig,
    ) -> Result<String, HarvestError> {
        let delay = Duration::from_millis(config.polite_delay_ms);
        let repository = config.base_url.as_str();
        let mut failures = 0u32;
        loop {
            self.pacer.wait(repository, delay).await;
            let sent = self
                .client
                .get(url.clone())
                .header(USER_AGENT, &self.user_agent)
                .send()
                .await;
            if let Ok(resp) = sent.as_ref() {
                if resp.status().is_success() {
                    let body = sent.expect("checked").text().await;
                    self.pacer.finished(repository);
                    return body.map_err(|e| HarvestError::Network(e.to_string()));
                }
            }
            self.pacer.finished(repository);
            let (reason, retry_after) = match sent {
                Ok(resp) if retryable(resp.status()) => (
                    format!("HTTP {}", resp.status().as_u16()),
                    retry_after(resp.headers()),
                ),
                Ok(resp) => return Err(HarvestError::HttpStatus(resp.status().as_u16())),
                Err(e) => (e.to_string(), None),
            };
            failures += 1;
            if failures > config.max_retries {
                return Err(HarvestError::RetriesExhausted {
                    attempts: failures,
                    last: reason,
                });
            }
            let wait = retry_after.unwrap_or_else(|| self.retry.backoff(failures));
            warn!(%url, %reason, wait_ms = wait.as_millis() as u64, "request failed, retrying");
            tokio::time::sleep(wait).await;
        }
    }
}

fn retryable(status: StatusCode) -> bool {
    status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS
}

fn retry_after(headers: &HeaderMap) -> Option<Duration> {
    let value = headers.get(RETRY_AFTER)?.to_str().ok()?.trim();
    if let Ok(secs) = value.parse::<u64>() {
        return Some(Duration::from_secs(secs));
    }
    let at = DateTime::parse_from_rfc2822(value).ok()?;
    let delta = at.with_timezone(&Utc) - Utc::now();
    Some(delta.to_std().unwrap_or(Duration::ZERO))
}

/// Builds the `ListRecords` request URL. A resumption token is an exclusive
/// argument: no other arguments accompany it.
pub fn list_records_url(config: &RepositoryConfig, token: Option<&str>) -> Result<Url, HarvestError> {
    let mut url = config.url()?;
    {
        let mut q = url.query_pairs_mut();
        q.append_pair("verb", "ListRecords");
        match token {
            Some(token) => {
                q.append_pair("resumptionToken", token);
            }
            None => {
                q.append_pair("metadataPrefix", &config.metadata_prefix);
                if let Some(set) = &config.set_spec {
                    q.append_pair("set", set);
                }
                if let Some(from) = &config.from {
                    q.append_pair("from", &from.to_string());
                }
                if let Some(until) = &config.until {
                    q.append_pair("until", &until.to_string());
                }
            }
        }
    }
    Ok(url)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reqwest::header::HeaderValue;

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy::default();
        let secs: Vec<u64> = (1..=9).map(|n| p.backoff(n).as_secs()).collect();
        assert_eq!(secs, [1, 2, 4, 8, 16, 32, 64, 64, 64]);
        assert_eq!(p.backoff(40).as_secs(), 64);
    }

    #[test]
    fn retry_after_seconds() {
        let mut h = HeaderMap::new();
        h.insert(RETRY_AFTER, HeaderValue::from_static("2"));
        assert_eq!(retry_after(&h), Some(Duration::from_secs(2)));
        h.insert(RETRY_AFTER, HeaderValue::from_static("Wed, 21 Oct 2015 07:28:00 GMT"));
        assert_eq!(retry_after(&h), Some(Duration::ZERO));
        h.insert(RETRY_AFTER, HeaderValue::from_static("soon"));
        assert_eq!(retry_after(&h), None);
    }

    #[test]
    fn request_urls() {
        let mut cfg = RepositoryConfig::new("http://repo.example.org/oai");
        cfg.set_spec = Some("ddc:004".into());
        cfg.from = Some("2020-01-01".parse().unwrap());
        let first = list_records_url(&cfg, None).unwrap();
        assert_eq!(
            first.as_str(),
            "http://repo.example.org/oai?verb=ListRecords&metadataPrefix=oai_dc&set=ddc%3A004&from=2020-01-01"
        );
        let next = list_records_url(&cfg, Some("a b/c")).unwrap();
        assert_eq!(
            next.as_str(),
            "http://repo.example.org/oai?verb=ListRecords&resumptionToken=a+b%2Fc"
        );
    }
}
