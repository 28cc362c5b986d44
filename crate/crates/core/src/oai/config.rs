use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use url::Url;

use super::record::Granularity;

pub const DEFAULT_METADATA_PREFIX: &str = "oai_dc";
pub const DEFAULT_POLITE_DELAY_MS: u64 = 1000;
pub const DEFAULT_MAX_RETRIES: u32 = 5;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("base_url {0:?} is not an absolute http(s) URL")]
    BadBaseUrl(String),
    #[error("invalid OAI datestamp {0:?}")]
    BadDatestamp(String),
    #[error("from is after until")]
    FromAfterUntil,
    #[error("from and until use different granularities")]
    MixedGranularity,
    #[error("invalid {field}: {value:?}")]
    BadToken { field: &'static str, value: String },
}

/// A selective-harvesting bound, at day or second granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OaiDatestamp {
    Day(NaiveDate),
    Second(DateTime<Utc>),
}

impl OaiDatestamp {
    pub fn granularity(&self) -> Granularity {
        match self {
            OaiDatestamp::Day(_) => Granularity::Day,
            OaiDatestamp::Second(_) => Granularity::Second,
        }
    }

    /// Earliest instant covered by this bound.
    pub fn start(&self) -> DateTime<Utc> {
        match self {
            OaiDatestamp::Day(d) => d.and_hms_opt(0, 0, 0).unwrap().and_utc(),
            OaiDatestamp::Second(t) => *t,
        }
    }

    /// Truncates an instant to the given repository granularity.
    pub fn at_granularity(t: DateTime<Utc>, granularity: Granularity) -> Self {
        match granularity {
            Granularity::Day => OaiDatestamp::Day(t.date_naive()),
            Granularity::Second => OaiDatestamp::Second(
                DateTime::from_timestamp(t.timestamp(), 0).expect("in range"),
            ),
        }
    }
}

impl fmt::Display for OaiDatestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OaiDatestamp::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            OaiDatestamp::Second(t) => f.write_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true)),
        }
    }
}

impl FromStr for OaiDatestamp {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() == 10 {
            return NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(OaiDatestamp::Day)
                .map_err(|_| ConfigError::BadDatestamp(s.to_string()));
        }
        if !s.ends_with('Z') {
            return Err(ConfigError::BadDatestamp(s.to_string()));
        }
        DateTime::parse_from_rfc3339(s)
            .map(|t| OaiDatestamp::Second(t.with_timezone(&Utc)))
            .map_err(|_| ConfigError::BadDatestamp(s.to_string()))
    }
}

impl Serialize for OaiDatestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OaiDatestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_prefix() -> String {
    DEFAULT_METADATA_PREFIX.to_string()
}
fn default_delay() -> u64 {
    DEFAULT_POLITE_DELAY_MS
}
fn default_retries() -> u32 {
    DEFAULT_MAX_RETRIES
}

/// Where and what to harvest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryConfig {
    pub base_url: String,
    #[serde(default = "default_prefix")]
    pub metadata_prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<OaiDatestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<OaiDatestamp>,
    #[serde(default = "default_delay")]
    pub polite_delay_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

impl RepositoryConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        RepositoryConfig {
            base_url: base_url.into(),
            metadata_prefix: default_prefix(),
            set_spec: None,
            from: None,
            until: None,
            polite_delay_ms: DEFAULT_POLITE_DELAY_MS,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.url()?;
        if !is_token(&self.metadata_prefix) {
            return Err(ConfigError::BadToken {
                field: "metadata_prefix",
                value: self.metadata_prefix.clone(),
            });
        }
        if let Some(set) = &self.set_spec {
            if !is_token(set) {
                return Err(ConfigError::BadToken {
                    field: "set_spec",
                    value: set.clone(),
                });
            }
        }
        if let (Some(from), Some(until)) = (self.from, self.until) {
            if from.granularity() != until.granularity() {
                return Err(ConfigError::MixedGranularity);
            }
            if from > until {
                return Err(ConfigError::FromAfterUntil);
            }
        }
        Ok(())
    }

    pub fn url(&self) -> Result<Url, ConfigError> {
        let url =
            Url::parse(&self.base_url).map_err(|_| ConfigError::BadBaseUrl(self.base_url.clone()))?;
        match url.scheme() {
            "http" | "https" if url.has_host() => Ok(url),
            _ => Err(ConfigError::BadBaseUrl(self.base_url.clone())),
        }
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c.is_control())
}
