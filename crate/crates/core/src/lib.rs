//! Co-authorship networks from OAI-PMH metadata.
//!
//! The pipeline harvests Dublin Core records from an OAI-PMH 2.0 repository
//! ([`oai`]), extracts authors and DDC classes ([`extract`]), stores
//! publications in a co-author index partitioned by DDC class ([`index`]),
//! ranks authors by betweenness centrality ([`centrality`]) and renders
//! network plots ([`plot`]). [`service`] exposes all of it over HTTP and the
//! command line.

pub mod centrality;
pub mod extract;
pub mod index;
pub mod oai;
pub mod plot;
pub mod service;
pub mod xml;
