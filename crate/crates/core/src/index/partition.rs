use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extract::{DdcClass, DdcLevel, InvalidDdc, Publication};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    RepositoryWide,
    DdcMain,
    DdcExact,
}

impl PartitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PartitionKind::RepositoryWide => "repository_wide",
            PartitionKind::DdcMain => "ddc_main",
            PartitionKind::DdcExact => "ddc_exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "repository_wide" => Some(PartitionKind::RepositoryWide),
            "ddc_main" => Some(PartitionKind::DdcMain),
            "ddc_exact" => Some(PartitionKind::DdcExact),
            _ => None,
        }
    }
}

/// Which slice of the repository a graph covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartitionKey {
    RepositoryWide,
    /// All publications whose DDC codes fall in this main class (`X00`).
    DdcMain(DdcClass),
    /// Publications carrying exactly this DDC code.
    DdcExact(DdcClass),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error(transparent)]
    Ddc(#[from] InvalidDdc),
    #[error("{0} is not a DDC main class (X00)")]
    NotMainClass(DdcClass),
    #[error("partition kind {0} requires a DDC code")]
    MissingCode(&'static str),
    #[error("unknown partition kind {0:?}")]
    UnknownKind(String),
}

impl PartitionKey {
    pub fn ddc_main(code: DdcClass) -> Result<Self, PartitionError> {
        if code.level() != DdcLevel::Main {
            return Err(PartitionError::NotMainClass(code));
        }
        Ok(PartitionKey::DdcMain(code))
    }

    pub fn ddc_exact(code: DdcClass) -> Self {
        PartitionKey::DdcExact(code)
    }

    /// Resolves a query-string DDC selector: absent means repository-wide, a
    /// single digit or an `X00` code means a main class, any other three-digit
    /// code an exact class.
    pub fn from_query(ddc: Option<&str>) -> Result<Self, PartitionError> {
        let Some(ddc) = ddc.map(str::trim) else {
            return Ok(PartitionKey::RepositoryWide);
        };
        let mut chars = ddc.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            return DdcClass::main_for_digit(c)
                .map(PartitionKey::DdcMain)
                .ok_or_else(|| InvalidDdc(ddc.to_string()).into());
        }
        let code: DdcClass = ddc.parse()?;
        Ok(match code.level() {
            DdcLevel::Main => PartitionKey::DdcMain(code),
            _ => PartitionKey::DdcExact(code),
        })
    }

    pub fn from_parts(kind: &str, code: Option<&str>) -> Result<Self, PartitionError> {
        let kind = PartitionKind::parse(kind).ok_or_else(|| PartitionError::UnknownKind(kind.into()))?;
        let code = || -> Result<DdcClass, PartitionError> {
            Ok(code.ok_or(PartitionError::MissingCode(kind.as_str()))?.parse()?)
        };
        match kind {
            PartitionKind::RepositoryWide => Ok(PartitionKey::RepositoryWide),
            PartitionKind::DdcMain => PartitionKey::ddc_main(code()?),
            PartitionKind::DdcExact => Ok(PartitionKey::DdcExact(code()?)),
        }
    }

    pub fn kind(&self) -> PartitionKind {
        match self {
            PartitionKey::RepositoryWide => PartitionKind::RepositoryWide,
            PartitionKey::DdcMain(_) => PartitionKind::DdcMain,
            PartitionKey::DdcExact(_) => PartitionKind::DdcExact,
        }
    }

    pub fn code(&self) -> Option<DdcClass> {
        match self {
            PartitionKey::RepositoryWide => None,
            PartitionKey::DdcMain(c) | PartitionKey::DdcExact(c) => Some(*c),
        }
    }

    pub fn contains(&self, publication: &Publication) -> bool {
        match self {
            PartitionKey::RepositoryWide => true,
            PartitionKey::DdcExact(code) => publication.ddc_classes.contains(code),
            PartitionKey::DdcMain(main) => publication
                .ddc_classes
                .iter()
                .any(|c| c.main_class() == *main),
        }
    }

    /// Every DDC partition a publication contributes to, besides the
    /// repository-wide one.
    pub fn ddc_partitions_of(publication: &Publication) -> impl Iterator<Item = PartitionKey> + '_ {
        publication.ddc_classes.iter().flat_map(|c| {
            [PartitionKey::DdcExact(*c), PartitionKey::DdcMain(c.main_class())]
        })
    }
}

impl fmt::Display for PartitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.code() {
            Some(code) => write!(f, "{}({code})", self.kind().as_str()),
            None => f.write_str(self.kind().as_str()),
        }
    }
}
