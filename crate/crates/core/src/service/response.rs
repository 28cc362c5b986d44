use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityRanking, EdgeMode};
use crate::index::{PartitionKey, PartitionKind};
use crate::xml;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseEntry {
    pub rank: usize,
    /// Display name.
    pub author: String,
    pub raw: f64,
    pub normalized: f64,
    pub publications: u32,
}

/// The most central authors of one partition, as served by the API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResponse {
    pub repository_id: String,
    pub partition_kind: PartitionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_code: Option<String>,
    pub edge_mode: EdgeMode,
    pub generated_at: DateTime<Utc>,
    pub entries: Vec<ResponseEntry>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("invalid centrality document: {0}")]
pub struct ResponseParseError(pub String);

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            // Kept as references so attribute normalization cannot alter them.
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

impl CentralityResponse {
    pub fn from_ranking(
        repository_id: &str,
        ranking: &CentralityRanking,
        generated_at: DateTime<Utc>,
    ) -> Self {
        CentralityResponse {
            repository_id: repository_id.to_string(),
            partition_kind: ranking.partition.kind(),
            partition_code: ranking.partition.code().map(|c| c.as_str().to_string()),
            edge_mode: ranking.mode,
            generated_at,
            entries: ranking
                .entries
                .iter()
                .map(|e| ResponseEntry {
                    rank: e.rank,
                    author: e.display.clone(),
                    raw: e.raw,
                    normalized: e.normalized,
                    publications: e.publication_count,
                })
                .collect(),
        }
    }

    pub fn partition(&self) -> Result<PartitionKey, ResponseParseError> {
        PartitionKey::from_parts(self.partition_kind.as_str(), self.partition_code.as_deref())
            .map_err(|e| ResponseParseError(e.to_string()))
    }

    /// Scores are written in Rust's shortest round-trip notation, so parsing
    /// the document back yields bit-identical values.
    pub fn to_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = write!(
            out,
            "<centralityResult repository=\"{}\" partitionKind=\"{}\"",
            escape_attr(&self.repository_id),
            self.partition_kind.as_str()
        );
        if let Some(code) = &self.partition_code {
            let _ = write!(out, " partitionCode=\"{}\"", escape_attr(code));
        }
        let _ = write!(
            out,
            " mode=\"{}\" generatedAt=\"{}\"",
            self.edge_mode.as_str(),
            self.generated_at.to_rfc3339_opts(SecondsFormat::AutoSi, true)
        );
        if self.entries.is_empty() {
            out.push_str("/>\n");
            return out;
        }
        out.push_str(">\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "  <author rank=\"{}\" raw=\"{}\" normalized=\"{}\" publications=\"{}\">{}</author>",
                e.rank,
                e.raw,
                e.normalized,
                e.publications,
                escape_text(&e.author)
            );
        }
        out.push_str("</centralityResult>\n");
        out
    }

    pub fn from_xml(document: &str) -> Result<Self, ResponseParseError> {
        let err = |m: String| ResponseParseError(m);
        let root = xml::parse(document).map_err(|e| err(e.to_string()))?;
        if root.name != "centralityResult" {
            return Err(err(format!("unexpected root element {}", root.name)));
        }
        let attr = |el: &xml::Element, name: &str| {
            el.attr(name)
                .map(str::to_string)
                .ok_or_else(|| err(format!("{} lacks attribute {name}", el.name)))
        };
        fn num<T: std::str::FromStr>(v: String, name: &str) -> Result<T, ResponseParseError> {
            v.trim()
                .parse()
                .map_err(|_| ResponseParseError(format!("bad {name} value {v:?}")))
        }
        let kind = attr(&root, "partitionKind")?;
        let mode = attr(&root, "mode")?;
        let generated_at = attr(&root, "generatedAt")?;
        let mut entries = Vec::new();
        for el in root.children_named("author") {
            entries.push(ResponseEntry {
                rank: num(attr(el, "rank")?, "rank")?,
                author: el.text(),
                raw: num(attr(el, "raw")?, "raw")?,
                normalized: num(attr(el, "normalized")?, "normalized")?,
                publications: num(attr(el, "publications")?, "publications")?,
            });
        }
        Ok(CentralityResponse {
            repository_id: attr(&root, "repository")?,
            partition_kind: PartitionKind::parse(&kind)
                .ok_or_else(|| err(format!("unknown partition kind {kind:?}")))?,
            partition_code: root.attr("partitionCode").map(str::to_string),
            edge_mode: EdgeMode::parse(&mode).ok_or_else(|| err(format!("unknown mode {mode:?}")))?,
            generated_at: DateTime::parse_from_rfc3339(&generated_at)
                .map_err(|e| err(format!("bad generatedAt: {e}")))?
                .with_timezone(&Utc),
            entries,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("response serializes")
    }

    pub fn from_json(document: &str) -> Result<Self, ResponseParseError> {
        serde_json::from_str(document).map_err(|e| ResponseParseError(e.to_string()))
    }
}
