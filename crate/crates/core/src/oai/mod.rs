//! OAI-PMH 2.0 harvesting: request construction, response parsing, paging
//! with resumption tokens, retry and politeness handling.

mod client;
mod config;
mod job;
mod parse;
mod record;

pub use client::{
    list_records_url, HarvestOutcome, Harvester, RecordSink, RetryPolicy, DEFAULT_USER_AGENT,
};
pub use config::{
    ConfigError, OaiDatestamp, RepositoryConfig, DEFAULT_MAX_RETRIES, DEFAULT_METADATA_PREFIX,
    DEFAULT_POLITE_DELAY_MS,
};
pub use job::{HarvestJob, InvalidTransition, JobHandle, JobState};
pub use parse::{parse_identify, parse_list_records};
pub use record::{
    is_dc_element, Granularity, ListRecordsPage, OaiRecord, RepositoryInfo, DC_ELEMENTS,
};

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("network error: {0}")]
    Network(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unsupported OAI-PMH protocol version {0:?}")]
    UnsupportedVersion(String),
    #[error("OAI-PMH error {code}: {message}")]
    Oai { code: String, message: String },
    #[error("resumption token rejected after restart: {0}")]
    BadResumptionToken(String),
    #[error("gave up after {attempts} failed attempts (last: {last})")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("unexpected HTTP status {0}")]
    HttpStatus(u16),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Job(#[from] InvalidTransition),
}
