use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::oai::OaiRecord;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{0:?} is not a three-digit DDC code")]
pub struct InvalidDdc(pub String);

/// Depth of a DDC notation within the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdcLevel {
    /// `X00`
    Main,
    /// `XY0`
    Division,
    /// `XYZ`
    Section,
}

/// A three-digit Dewey Decimal Classification code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DdcClass([u8; 3]);

impl DdcClass {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii digits")
    }

    pub fn level(&self) -> DdcLevel {
        match self.0 {
            [_, b'0', b'0'] => DdcLevel::Main,
            [_, _, b'0'] => DdcLevel::Division,
            _ => DdcLevel::Section,
        }
    }

    /// The main class (`X00`) this code belongs to.
    pub fn main_class(&self) -> DdcClass {
        DdcClass([self.0[0], b'0', b'0'])
    }

    /// Main class for a single leading digit.
    pub fn main_for_digit(digit: char) -> Option<DdcClass> {
        digit
            .is_ascii_digit()
            .then(|| DdcClass([digit as u8, b'0', b'0']))
    }
}

impl FromStr for DdcClass {
    type Err = InvalidDdc;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            &[a, b, c] if [a, b, c].iter().all(u8::is_ascii_digit) => Ok(DdcClass([a, b, c])),
            _ => Err(InvalidDdc(s.to_string())),
        }
    }
}

impl fmt::Display for DdcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for DdcClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DdcClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("bad DDC pattern {pattern:?}: {reason}")]
pub struct PatternError {
    pub pattern: String,
    pub reason: String,
}

/// Where DDC codes are looked for. Every pattern must be anchored by the
/// caller's choice and have exactly one capture group holding the code.
#[derive(Debug, Clone)]
pub struct DdcPatterns {
    subject: Vec<Regex>,
    set_spec: Vec<Regex>,
}

const SUBJECT_PATTERNS: [&str; 2] = [r"^(?i:ddc)\s*:\s*([0-9]{3})$", r"^([0-9]{3})$"];
const SET_PATTERNS: [&str; 1] = [r"^(?i:ddc):([0-9]{3})$"];

static DEFAULT_PATTERNS: LazyLock<DdcPatterns> = LazyLock::new(|| {
    DdcPatterns::new(SUBJECT_PATTERNS, SET_PATTERNS).expect("built-in patterns compile")
});

impl Default for DdcPatterns {
    fn default() -> Self {
        DEFAULT_PATTERNS.clone()
    }
}

fn compile<'a>(patterns: impl IntoIterator<Item = &'a str>) -> Result<Vec<Regex>, PatternError> {
    patterns
        .into_iter()
        .map(|p| {
            let re = Regex::new(p).map_err(|e| PatternError {
                pattern: p.to_string(),
                reason: e.to_string(),
            })?;
            if re.captures_len() != 2 {
                return Err(PatternError {
                    pattern: p.to_string(),
                    reason: "needs exactly one capture group".into(),
                });
            }
            Ok(re)
        })
        .collect()
}

impl DdcPatterns {
    pub fn new<'a>(
        subject: impl IntoIterator<Item = &'a str>,
        set_spec: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, PatternError> {
        Ok(DdcPatterns {
            subject: compile(subject)?,
            set_spec: compile(set_spec)?,
        })
    }

    /// Adds patterns on top of the built-in ones.
    pub fn extended<'a>(
        subject: impl IntoIterator<Item = &'a str>,
        set_spec: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, PatternError> {
        let mut p = DdcPatterns::default();
        p.subject.extend(compile(subject)?);
        p.set_spec.extend(compile(set_spec)?);
        Ok(p)
    }

    fn scan(patterns: &[Regex], value: &str, out: &mut BTreeSet<DdcClass>) {
        let value = value.trim();
        for re in patterns {
            if let Some(code) = re
                .captures(value)
                .and_then(|c| c.get(1))
                .and_then(|m| m.as_str().parse().ok())
            {
                out.insert(code);
            }
        }
    }

    pub fn extract(&self, record: &OaiRecord) -> BTreeSet<DdcClass> {
        let mut out = BTreeSet::new();
        for subject in record.subjects() {
            Self::scan(&self.subject, subject, &mut out);
        }
        for set in &record.set_specs {
            Self::scan(&self.set_spec, set, &mut out);
        }
        out
    }
}

/// DDC codes found in `dc:subject` values and `setSpec` tokens.
pub fn extract_ddc(record: &OaiRecord) -> BTreeSet<DdcClass> {
    DEFAULT_PATTERNS.extract(record)
}
