use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("author name is empty")]
pub struct EmptyName;

/// An author identity: `canonical` is the lowercase `"last, first"` key used
/// for graph identity, `display` keeps the original casing in the same order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalName {
    canonical: String,
    display: String,
}

impl CanonicalName {
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn display(&self) -> &str {
        &self.display
    }
}

impl Ord for CanonicalName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical
            .cmp(&other.canonical)
            .then_with(|| self.display.cmp(&other.display))
    }
}

impl PartialOrd for CanonicalName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn display_form(raw: &str) -> Option<String> {
    let collapsed = collapse(raw);
    if collapsed.is_empty() {
        return None;
    }
    if let Some((last, rest)) = collapsed.split_once(',') {
        let (last, rest) = (last.trim(), rest.trim());
        return match (last.is_empty(), rest.is_empty()) {
            (true, true) => None,
            (true, false) => display_form(rest),
            // A trailing comma carries no information.
            (false, true) => display_form(last),
            (false, false) => Some(format!("{last}, {rest}")),
        };
    }
    match collapsed.rsplit_once(' ') {
        // Surname is the final token of a comma-less name.
        Some((given, surname)) => Some(format!("{surname}, {given}")),
        None => Some(collapsed),
    }
}

/// Normalizes a `dc:creator` value into canonical `"last, first"` form.
pub fn normalize_author_name(raw: &str) -> Result<CanonicalName, EmptyName> {
    let display = display_form(raw).ok_or(EmptyName)?;
    Ok(CanonicalName {
        canonical: display.to_lowercase(),
        display,
    })
}

impl Serialize for CanonicalName {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.display)
    }
}

impl<'de> Deserialize<'de> for CanonicalName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        normalize_author_name(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canon(s: &str) -> String {
        normalize_author_name(s).unwrap().canonical().to_string()
    }

    #[test]
    fn comma_form_is_case_folded() {
        let n = normalize_author_name("Brandt, Philipp").unwrap();
        assert_eq!(n.canonical(), "brandt, philipp");
        assert_eq!(n.display(), "Brandt, Philipp");
    }

    #[test]
    fn natural_order_is_reordered() {
        assert_eq!(canon("Philipp  Brandt"), "brandt, philipp");
        assert_eq!(canon("A. Author"), canon("A.  Author"));
        assert_eq!(canon("Plato"), "plato");
    }

    #[test]
    fn degenerate_commas() {
        assert_eq!(canon("Okafor,"), "okafor");
        assert_eq!(canon("Peter Okafor,"), "okafor, peter");
        assert_eq!(canon(", Peter Okafor"), "okafor, peter");
        assert_eq!(normalize_author_name(" , "), Err(EmptyName));
    }

    #[test]
    fn blank_is_error() {
        assert_eq!(normalize_author_name("   "), Err(EmptyName));
        assert_eq!(normalize_author_name(""), Err(EmptyName));
        assert_eq!(normalize_author_name("\t\n"), Err(EmptyName));
    }

    proptest! {
        #[test]
        fn idempotent(raw in "[ ,a-zA-ZäöüÄÖÜ.\\-]{0,40}") {
            if let Ok(once) = normalize_author_name(&raw) {
                let twice = normalize_author_name(once.display()).unwrap();
                prop_assert_eq!(&once, &twice);
                prop_assert!(!once.canonical().is_empty());
                prop_assert_eq!(once.canonical(), once.canonical().trim());
                prop_assert!(!once.canonical().contains("  "));
            }
        }
    }
}
