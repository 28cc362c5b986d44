//! Parse one `ListRecords` page and turn its records into publications.
//!
//! `cargo run --example extract`

use coauthor_net::extract::{extract_publication, Extracted};
use coauthor_net::oai::parse_list_records;

const PAGE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<OAI-PMH xmlns="http://www.openarchives.org/OAI/2.0/">
  <responseDate>2024-05-01T12:00:00Z</responseDate>
  <request verb="ListRecords">http://repo.example.org/oai</request>
  <ListRecords>
    <record>
      <header>
        <identifier>oai:repo.example.org:1</identifier>
        <datestamp>2023-11-02</datestamp>
        <setSpec>ddc:004</setSpec>
      </header>
      <metadata>
        <oai_dc:dc xmlns:oai_dc="http://www.openarchives.org/OAI/2.0/oai_dc/" xmlns:dc="http://purl.org/dc/elements/1.1/">
          <dc:title>Search term recommendation</dc:title>
          <dc:creator>Okafor, Peter</dc:creator>
          <dc:creator>Philipp Lindqvist</dc:creator>
          <dc:subject>ddc:020</dc:subject>
        </oai_dc:dc>
      </metadata>
    </record>
    <record>
      <header status="deleted">
        <identifier>oai:repo.example.org:2</identifier>
        <datestamp>2023-11-03</datestamp>
      </header>
    </record>
    <resumptionToken completeListSize="2" cursor="0"/>
  </ListRecords>
</OAI-PMH>"#;

/// One line per record: identifier, canonical authors, DDC codes.
pub fn run_example() -> Vec<String> {
    let page = parse_list_records(PAGE).expect("well-formed page");
    page.records
        .iter()
        .map(|record| match extract_publication(record) {
            Extracted::Publication(p) => {
                let authors: Vec<&str> = p.authors.iter().map(|a| a.canonical()).collect();
                let codes: Vec<&str> = p.ddc_classes.iter().map(|c| c.as_str()).collect();
                format!("{}: {} [{}]", p.record_id, authors.join("; "), codes.join(", "))
            }
            Extracted::Deletion(id) => format!("{id}: deleted"),
        })
        .collect()
}

fn main() {
    for line in run_example() {
        println!("{line}");
    }
}
