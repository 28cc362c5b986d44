use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// The fifteen Dublin Core Metadata Element Set names.
pub const DC_ELEMENTS: [&str; 15] = [
    "title",
    "creator",
    "subject",
    "description",
    "publisher",
    "contributor",
    "date",
    "type",
    "format",
    "identifier",
    "source",
    "language",
    "relation",
    "coverage",
    "rights",
];

pub fn is_dc_element(name: &str) -> bool {
    DC_ELEMENTS.contains(&name)
}

/// One harvested metadata record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OaiRecord {
    pub identifier: String,
    pub datestamp: DateTime<Utc>,
    pub set_specs: Vec<String>,
    pub deleted: bool,
    /// Dublin Core element name to values, in document order.
    pub dc_fields: BTreeMap<String, Vec<String>>,
    pub raw_xml: String,
}

impl OaiRecord {
    pub fn field(&self, name: &str) -> &[String] {
        self.dc_fields.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn creators(&self) -> &[String] {
        self.field("creator")
    }

    pub fn subjects(&self) -> &[String] {
        self.field("subject")
    }
}

/// One `ListRecords` response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListRecordsPage {
    pub records: Vec<OaiRecord>,
    /// `None` marks the final page.
    pub resumption_token: Option<String>,
    pub complete_list_size: Option<u64>,
    pub cursor: Option<u64>,
}

impl ListRecordsPage {
    pub fn is_final(&self) -> bool {
        self.resumption_token.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    #[serde(rename = "YYYY-MM-DD")]
    Day,
    #[serde(rename = "YYYY-MM-DDThh:mm:ssZ")]
    Second,
}

/// Parsed `Identify` response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryInfo {
    pub repository_name: String,
    pub base_url: String,
    pub protocol_version: String,
    pub earliest_datestamp: String,
    pub granularity: Granularity,
}
