//! Single-file index snapshots.
//!
//! Layout, UTF-8 with LF line endings:
//!
//! ```text
//! {"format_version":1,"repository_id":"…","built_at":"…","record_count":N}
//! {"record_id":"…","authors":["…"],"ddc":["004"],"datestamp":"…"}      × N
//! fnv64:<16 lowercase hex digits>
//! ```
//!
//! The checksum is FNV-1a (64 bit) over every byte preceding the checksum
//! line.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::extract::Publication;

pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_PREFIX: &str = "fnv64:";

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

/// The persisted state of an index: its publications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSnapshot {
    pub repository_id: String,
    pub publications: BTreeMap<String, Publication>,
    pub built_at: DateTime<Utc>,
    pub format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    repository_id: String,
    built_at: DateTime<Utc>,
    record_count: usize,
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

impl IndexSnapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            format_version: self.format_version,
            repository_id: self.repository_id.clone(),
            built_at: self.built_at,
            record_count: self.publications.len(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        for publication in self.publications.values() {
            serde_json::to_writer(&mut out, publication).expect("publication serializes");
            out.push(b'\n');
        }
        let sum = fnv1a64(&out);
        writeln!(out, "{CHECKSUM_PREFIX}{sum:016x}").expect("write to vec");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let corrupt = |m: &str| SnapshotError::Corrupt(m.to_string());
        let body = bytes.strip_suffix(b"\n").ok_or_else(|| corrupt("missing final newline"))?;
        let split = body
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |i| i + 1);
        let (content, checksum_line) = body.split_at(split);
        let checksum_line =
            std::str::from_utf8(checksum_line).map_err(|_| corrupt("checksum line is not UTF-8"))?;
        let expected = checksum_line
            .strip_prefix(CHECKSUM_PREFIX)
            .filter(|hex| hex.len() == 16)
            .and_then(|hex| u64::from_str_radix(hex, 16).ok())
            .ok_or_else(|| corrupt("missing or malformed checksum line"))?;
        if fnv1a64(content) != expected {
            return Err(corrupt("checksum mismatch"));
        }

        let text = std::str::from_utf8(content).map_err(|_| corrupt("not UTF-8"))?;
        let mut lines = text.lines();
        let header: Header = serde_json::from_str(lines.next().ok_or_else(|| corrupt("empty"))?)
            .map_err(|e| SnapshotError::Corrupt(format!("header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(SnapshotError::VersionMismatch {
                found: header.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let mut publications = BTreeMap::new();
        for (n, line) in lines.enumerate() {
            let p: Publication = serde_json::from_str(line)
                .map_err(|e| SnapshotError::Corrupt(format!("record line {}: {e}", n + 2)))?;
            if publications.insert(p.record_id.clone(), p).is_some() {
                return Err(corrupt("duplicate record id"));
            }
        }
        if publications.len() != header.record_count {
            return Err(SnapshotError::Corrupt(format!(
                "header announces {} records, found {}",
                header.record_count,
                publications.len()
            )));
        }
        Ok(IndexSnapshot {
            repository_id: header.repository_id,
            publications,
            built_at: header.built_at,
            format_version: header.format_version,
        })
    }
}

/// Writes the snapshot atomically (temporary file, then rename).
pub fn save(snapshot: &IndexSnapshot, path: &Path) -> Result<(), SnapshotError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, snapshot.to_bytes())?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<IndexSnapshot, SnapshotError> {
    IndexSnapshot::from_bytes(&fs::read(path)?)
}
