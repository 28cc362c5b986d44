//! Parsers for OAI-PMH 2.0 `Identify` and `ListRecords` responses.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::config::OaiDatestamp;
use super::record::{is_dc_element, Granularity, ListRecordsPage, OaiRecord, RepositoryInfo};
use super::HarvestError;
use crate::xml::{self, Element};

fn protocol(msg: impl Into<String>) -> HarvestError {
    HarvestError::Protocol(msg.into())
}

/// Parses the document and checks for the `OAI-PMH` envelope and any
/// top-level `<error>` elements.
fn envelope(text: &str) -> Result<Element, HarvestError> {
    let root = xml::parse(text).map_err(|e| protocol(e.to_string()))?;
    if root.name != "OAI-PMH" {
        return Err(protocol(format!("root element is <{}>, not <OAI-PMH>", root.name)));
    }
    if let Some(err) = root.child("error") {
        return Err(HarvestError::Oai {
            code: err.attr("code").unwrap_or("unknown").to_string(),
            message: err.trimmed_text(),
        });
    }
    Ok(root)
}

pub fn parse_datestamp(s: &str) -> Result<DateTime<Utc>, HarvestError> {
    s.parse::<OaiDatestamp>()
        .map(|d| d.start())
        .map_err(|_| protocol(format!("bad datestamp {s:?}")))
}

pub fn parse_identify(text: &str) -> Result<RepositoryInfo, HarvestError> {
    let root = envelope(text)?;
    let identify = root
        .child("Identify")
        .ok_or_else(|| protocol("missing <Identify> element"))?;
    let required = |name: &str| {
        identify
            .child_text(name)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| protocol(format!("Identify lacks <{name}>")))
    };
    let protocol_version = required("protocolVersion")?;
    let granularity = match required("granularity")?.as_str() {
        "YYYY-MM-DD" => Granularity::Day,
        "YYYY-MM-DDThh:mm:ssZ" => Granularity::Second,
        other => return Err(protocol(format!("unknown granularity {other:?}"))),
    };
    let info = RepositoryInfo {
        repository_name: required("repositoryName")?,
        base_url: required("baseURL")?,
        earliest_datestamp: required("earliestDatestamp")?,
        protocol_version,
        granularity,
    };
    if info.protocol_version != "2.0" {
        return Err(HarvestError::UnsupportedVersion(info.protocol_version));
    }
    Ok(info)
}

pub fn parse_list_records(text: &str) -> Result<ListRecordsPage, HarvestError> {
    let root = envelope(text)?;
    let list = root
        .child("ListRecords")
        .ok_or_else(|| protocol("missing <ListRecords> element"))?;
    let records = list
        .children_named("record")
        .map(|r| parse_record(text, r))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut resumption_token, mut complete_list_size, mut cursor) = (None, None, None);
    if let Some(tok) = list.child("resumptionToken") {
        let value = tok.trimmed_text();
        if !value.is_empty() {
            resumption_token = Some(value);
        }
        complete_list_size = parse_count(tok, "completeListSize")?;
        cursor = parse_count(tok, "cursor")?;
    }
    if records.is_empty() && resumption_token.is_some() {
        return Err(protocol("empty ListRecords page carries a resumption token"));
    }
    Ok(ListRecordsPage {
        records,
        resumption_token,
        complete_list_size,
        cursor,
    })
}

fn parse_count(el: &Element, name: &str) -> Result<Option<u64>, HarvestError> {
    el.attr(name)
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| protocol(format!("bad {name} attribute {v:?}")))
        })
        .transpose()
}

fn parse_record(source: &str, record: &Element) -> Result<OaiRecord, HarvestError> {
    let header = record
        .child("header")
        .ok_or_else(|| protocol("record without <header>"))?;
    let identifier = header
        .child_text("identifier")
        .filter(|s| !s.is_empty())
        .ok_or_else(|| protocol("record header without identifier"))?;
    let datestamp = header
        .child_text("datestamp")
        .ok_or_else(|| protocol(format!("record {identifier} has no datestamp")))?;
    let datestamp = parse_datestamp(&datestamp)?;
    let set_specs = header
        .children_named("setSpec")
        .map(Element::trimmed_text)
        .filter(|s| !s.is_empty())
        .collect();
    let deleted = header.attr("status") == Some("deleted");

    let mut dc_fields: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if let Some(dc) = record.child("metadata").and_then(|m| m.child("dc")) {
        for field in dc.elements() {
            if !is_dc_element(&field.name) {
                continue;
            }
            let value = field.trimmed_text();
            if value.is_empty() {
                continue;
            }
            dc_fields.entry(field.name.clone()).or_default().push(value);
        }
    }

    Ok(OaiRecord {
        identifier,
        datestamp,
        set_specs,
        deleted,
        dc_fields,
        raw_xml: source[record.span.clone()].to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTIFY: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/"
         xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"
         xsi:schemaLocation="http://www.openarchives.org/OAI/2.0/ http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd">
  <responseDate>2002-02-08T12:00:01Z</responseDate>
  <request verb="Identify">http://memory.loc.gov/cgi-bin/oai</request>
  <Identify>
    <repositoryName>Library of Congress Open Archive Initiative Repository 1</repositoryName>
    <baseURL>http://memory.loc.gov/cgi-bin/oai</baseURL>
    <protocolVersion>2.0</protocolVersion>
    <adminEmail>somebody@loc.gov</adminEmail>
    <adminEmail>anybody@loc.gov</adminEmail>
    <earliestDatestamp>1990-02-01T12:00:00Z</earliestDatestamp>
    <deletedRecord>transient</deletedRecord>
    <granularity>YYYY-MM-DDThh:mm:ssZ</granularity>
    <compression>deflate</compression>
  </Identify>
</OAI-PMH>"#;

    #[test]
    fn identify_fields() {
        let info = parse_identify(IDENTIFY).unwrap();
        assert_eq!(
            info,
            RepositoryInfo {
                repository_name: "Library of Congress Open Archive Initiative Repository 1".into(),
                base_url: "http://memory.loc.gov/cgi-bin/oai".into(),
                protocol_version: "2.0".into(),
                earliest_datestamp: "1990-02-01T12:00:00Z".into(),
                granularity: Granularity::Second,
            }
        );
    }

    #[test]
    fn identify_old_version() {
        let doc = IDENTIFY.replace(">2.0<", ">1.1<");
        assert!(matches!(
            parse_identify(&doc),
            Err(HarvestError::UnsupportedVersion(v)) if v == "1.1"
        ));
    }

    #[test]
    fn identify_html_page() {
        let html = "<!DOCTYPE html><html><body><h1>502 Bad Gateway</h1></body></html>";
        assert!(matches!(parse_identify(html), Err(HarvestError::Protocol(_))));
        assert!(matches!(
            parse_identify("<html><body><p>broken<br></body></html>"),
            Err(HarvestError::Protocol(_))
        ));
    }

    const PAGE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/">
  <responseDate>2012-06-01T10:00:00Z</responseDate>
  <request verb="ListRecords" metadataPrefix="oai_dc">http://repo.example.org/oai</request>
  <ListRecords>
    <record>
      <header>
        <identifier>oai:repo:1</identifier>
        <datestamp>2012-05-01</datestamp>
        <setSpec>ddc:004</setSpec>
        <setSpec>doc-type:article</setSpec>
      </header>
      <metadata>
        <oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/"
                   xmlns:dc="http://purl.org/dc/elements/1.1/">
          <dc:title>Search &amp; Retrieval</dc:title>
          <dc:creator>Brandt, Philipp</dc:creator>
          <dc:creator>J&#228;ger, Thomas</dc:creator>
          <dc:creator>Lindqvist, Philipp</dc:creator>
          <dc:subject>ddc:004</dc:subject>
          <dc:date>2012</dc:date>
        </oai_dc:dc>
      </metadata>
    </record>
    <record>
      <header status="deleted">
        <identifier>oai:repo:2</identifier>
        <datestamp>2012-05-02</datestamp>
      </header>
    </record>
    <resumptionToken completeListSize="25" cursor="0">tok1</resumptionToken>
  </ListRecords>
</OAI-PMH>"#;

    #[test]
    fn list_records_page() {
        let page = parse_list_records(PAGE).unwrap();
        assert_eq!(page.records.len(), 2);
        assert_eq!(page.resumption_token.as_deref(), Some("tok1"));
        assert_eq!(page.complete_list_size, Some(25));
        assert_eq!(page.cursor, Some(0));

        let first = &page.records[0];
        assert_eq!(first.identifier, "oai:repo:1");
        assert_eq!(first.datestamp.to_rfc3339(), "2012-05-01T00:00:00+00:00");
        assert_eq!(first.set_specs, ["ddc:004", "doc-type:article"]);
        assert!(!first.deleted);
        assert_eq!(first.creators(), ["Brandt, Philipp", "Jäger, Thomas", "Lindqvist, Philipp"]);
        assert_eq!(first.field("title"), ["Search & Retrieval"]);
        assert!(first.raw_xml.starts_with("<record>") && first.raw_xml.ends_with("</record>"));

        let second = &page.records[1];
        assert!(second.deleted);
        assert!(second.dc_fields.is_empty());
    }

    #[test]
    fn empty_token_is_final() {
        let doc = PAGE.replace(
            r#"<resumptionToken completeListSize="25" cursor="0">tok1</resumptionToken>"#,
            r#"<resumptionToken completeListSize="25" cursor="20"/>"#,
        );
        let page = parse_list_records(&doc).unwrap();
        assert!(page.is_final());
        assert_eq!(page.cursor, Some(20));
    }

    #[test]
    fn oai_error_element() {
        let doc = r#"<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/">
          <responseDate>2012-06-01T10:00:00Z</responseDate>
          <request verb="ListRecords">http://repo.example.org/oai</request>
          <error code="noRecordsMatch">nothing here</error></OAI-PMH>"#;
        match parse_list_records(doc) {
            Err(HarvestError::Oai { code, message }) => {
                assert_eq!(code, "noRecordsMatch");
                assert_eq!(message, "nothing here");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_list_records() {
        let doc = r#"<OAI-PMH><responseDate>2012-06-01T10:00:00Z</responseDate></OAI-PMH>"#;
        assert!(matches!(parse_list_records(doc), Err(HarvestError::Protocol(_))));
    }
}
