//! A manifest-driven mock OAI-PMH 2.0 repository for harvester tests.
//!
//! The manifest lists the records to serve, the page size used for
//! `ListRecords` paging, and fault-injection directives (HTTP errors with an
//! optional `Retry-After`, or OAI error codes) keyed by page number. Every
//! request is logged with its arrival time so tests can check pacing and
//! exactly-once delivery.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub identifier: String,
    /// `YYYY-MM-DD` or `YYYY-MM-DDThh:mm:ssZ`.
    pub datestamp: String,
    #[serde(default)]
    pub sets: Vec<String>,
    #[serde(default)]
    pub deleted: bool,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub creators: Vec<String>,
    #[serde(default)]
    pub subjects: Vec<String>,
    /// Further Dublin Core elements, name to values.
    #[serde(default)]
    pub dc: BTreeMap<String, Vec<String>>,
}

/// A fault injected into the response for one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    /// 1-based page number the fault applies to.
    pub page: usize,
    /// How many requests for that page fail before it is served normally.
    #[serde(default = "one")]
    pub times: usize,
    #[serde(default)]
    pub status: Option<u16>,
    #[serde(default)]
    pub retry_after: Option<u64>,
    /// OAI-PMH error code returned with HTTP 200 instead of the page.
    #[serde(default)]
    pub oai_error: Option<String>,
}

fn one() -> usize {
    1
}

fn default_page_size() -> usize {
    10
}

fn default_granularity() -> String {
    "YYYY-MM-DD".into()
}

fn default_name() -> String {
    "Mock Repository".into()
}

fn default_version() -> String {
    "2.0".into()
}

fn default_earliest() -> String {
    "1990-01-01".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_name")]
    pub repository_name: String,
    #[serde(default = "default_version")]
    pub protocol_version: String,
    #[serde(default = "default_granularity")]
    pub granularity: String,
    #[serde(default = "default_earliest")]
    pub earliest_datestamp: String,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    pub records: Vec<ManifestRecord>,
    #[serde(default)]
    pub faults: Vec<Fault>,
}

impl Manifest {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Manifest::from_json(&text).map_err(std::io::Error::other)
    }

    pub fn identifiers(&self) -> Vec<String> {
        self.records.iter().map(|r| r.identifier.clone()).collect()
    }
}

/// One request the mock received.
#[derive(Debug, Clone)]
pub struct LoggedRequest {
    pub at: Instant,
    pub query: BTreeMap<String, String>,
    pub status: u16,
    /// Page number served or faulted, if the request was a `ListRecords`.
    pub page: Option<usize>,
}

struct MockState {
    manifest: Manifest,
    faults: Vec<Fault>,
    log: Vec<LoggedRequest>,
}

/// A running mock repository; shuts down when dropped.
pub struct MockServer {
    base_url: String,
    state: Arc<Mutex<MockState>>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
}

impl MockServer {
    /// Serves `manifest` on an ephemeral localhost port from a dedicated
    /// thread, so it works from synchronous and asynchronous tests alike.
    pub fn start(manifest: Manifest) -> std::io::Result<Self> {
        let listener = std::net::TcpListener::bind(("127.0.0.1", 0))?;
        listener.set_nonblocking(true)?;
        let addr: SocketAddr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(MockState {
            faults: manifest.faults.clone(),
            manifest,
            log: Vec::new(),
        }));
        let (tx, rx) = oneshot::channel::<()>();
        let app = Router::new()
            .route("/oai", get(handle))
            .with_state(Arc::clone(&state));
        let thread = thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .expect("mock runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("tokio listener");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .expect("mock server");
            });
        });
        Ok(MockServer {
            base_url: format!("http://{addr}/oai"),
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn requests(&self) -> Vec<LoggedRequest> {
        self.state.lock().unwrap().log.clone()
    }

    /// Replaces the served records, e.g. to simulate repository updates.
    pub fn set_records(&self, records: Vec<ManifestRecord>) {
        self.state.lock().unwrap().manifest.records = records;
    }

    pub fn add_fault(&self, fault: Fault) {
        self.state.lock().unwrap().faults.push(fault);
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn parse_stamp(s: &str) -> Option<DateTime<Utc>> {
    if s.len() == 10 {
        return NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .ok()
            .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc());
    }
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.with_timezone(&Utc))
}

fn envelope(query: &BTreeMap<String, String>, body: &str) -> String {
    let mut attrs = String::new();
    for (k, v) in query {
        if k != "resumptionToken" || !v.is_empty() {
            let _ = write!(attrs, " {}=\"{}\"", k, escape(v));
        }
    }
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://www.openarchives.org/OAI/2.0/ http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd\">\n\
         <responseDate>{}</responseDate>\n<request{attrs}>http://mock/oai</request>\n{body}\n</OAI-PMH>\n",
        Utc::now().format("%Y-%m-%dT%H:%M:%SZ")
    )
}

fn oai_error(query: &BTreeMap<String, String>, code: &str, message: &str) -> String {
    envelope(
        query,
        &format!("<error code=\"{}\">{}</error>", escape(code), escape(message)),
    )
}

fn record_xml(r: &ManifestRecord) -> String {
    let mut x = String::from("<record>\n");
    if r.deleted {
        x.push_str("<header status=\"deleted\">");
    } else {
        x.push_str("<header>");
    }
    let _ = write!(
        x,
        "<identifier>{}</identifier><datestamp>{}</datestamp>",
        escape(&r.identifier),
        escape(&r.datestamp)
    );
    for s in &r.sets {
        let _ = write!(x, "<setSpec>{}</setSpec>", escape(s));
    }
    x.push_str("</header>\n");
    if !r.deleted {
        x.push_str(
            "<metadata>\n<oai_dc:dc xmlns:oai_dc=\"http://www.openarchives.org/OAI/2.0/oai_dc/\" \
             xmlns:dc=\"http://purl.org/dc/elements/1.1/\">\n",
        );
        let mut fields: Vec<(&str, &String)> = Vec::new();
        fields.extend(r.title.iter().map(|t| ("title", t)));
        fields.extend(r.creators.iter().map(|c| ("creator", c)));
        fields.extend(r.subjects.iter().map(|s| ("subject", s)));
        for (name, values) in &r.dc {
            fields.extend(values.iter().map(|v| (name.as_str(), v)));
        }
        for (name, value) in fields {
            let _ = writeln!(x, "<dc:{name}>{}</dc:{name}>", escape(value));
        }
        x.push_str("</oai_dc:dc>\n</metadata>\n");
    }
    x.push_str("</record>");
    x
}

/// Resumption tokens carry the selection arguments and the next offset.
fn encode_token(prefix: &str, set: Option<&str>, from: Option<&str>, until: Option<&str>, offset: usize) -> String {
    format!(
        "{offset}!{prefix}!{}!{}!{}",
        set.unwrap_or(""),
        from.unwrap_or(""),
        until.unwrap_or("")
    )
}

struct Selection {
    prefix: String,
    set: Option<String>,
    from: Option<String>,
    until: Option<String>,
    offset: usize,
}

fn decode_token(token: &str) -> Option<Selection> {
    let parts: Vec<&str> = token.split('!').collect();
    let [offset, prefix, set, from, until] = parts[..] else {
        return None;
    };
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
    Some(Selection {
        offset: offset.parse().ok()?,
        prefix: prefix.to_string(),
        set: opt(set),
        from: opt(from),
        until: opt(until),
    })
}

fn xml_response(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static("text/xml; charset=utf-8"))],
        body,
    )
        .into_response()
}

async fn handle(
    State(state): State<Arc<Mutex<MockState>>>,
    Query(query): Query<BTreeMap<String, String>>,
) -> Response {
    let at = Instant::now();
    let mut st = state.lock().unwrap();
    let (status, page, response) = respond(&mut st, &query);
    st.log.push(LoggedRequest {
        at,
        query,
        status: status.as_u16(),
        page,
    });
    response
}

fn respond(st: &mut MockState, query: &BTreeMap<String, String>) -> (StatusCode, Option<usize>, Response) {
    let ok = |body: String| (StatusCode::OK, None, xml_response(StatusCode::OK, body));
    match query.get("verb").map(String::as_str) {
        Some("Identify") => {
            let m = &st.manifest;
            ok(envelope(
                query,
                &format!(
                    "<Identify><repositoryName>{}</repositoryName><baseURL>http://mock/oai</baseURL>\
                     <protocolVersion>{}</protocolVersion><adminEmail>mock@example.org</adminEmail>\
                     <earliestDatestamp>{}</earliestDatestamp><deletedRecord>persistent</deletedRecord>\
                     <granularity>{}</granularity></Identify>",
                    escape(&m.repository_name),
                    escape(&m.protocol_version),
                    escape(&m.earliest_datestamp),
                    escape(&m.granularity)
                ),
            ))
        }
        Some("ListRecords") => list_records(st, query),
        _ => ok(oai_error(query, "badVerb", "illegal or missing verb")),
    }
}

fn list_records(st: &mut MockState, query: &BTreeMap<String, String>) -> (StatusCode, Option<usize>, Response) {
    let sel = if let Some(token) = query.get("resumptionToken") {
        if query.len() != 2 {
            let body = oai_error(query, "badArgument", "resumptionToken is exclusive");
            return (StatusCode::OK, None, xml_response(StatusCode::OK, body));
        }
        match decode_token(token) {
            Some(sel) => sel,
            None => {
                let body = oai_error(query, "badResumptionToken", "unknown token");
                return (StatusCode::OK, None, xml_response(StatusCode::OK, body));
            }
        }
    } else {
        let Some(prefix) = query.get("metadataPrefix") else {
            let body = oai_error(query, "badArgument", "metadataPrefix required");
            return (StatusCode::OK, None, xml_response(StatusCode::OK, body));
        };
        Selection {
            prefix: prefix.clone(),
            set: query.get("set").cloned(),
            from: query.get("from").cloned(),
            until: query.get("until").cloned(),
            offset: 0,
        }
    };
    let page_size = st.manifest.page_size.max(1);
    let page = sel.offset / page_size + 1;

    if let Some(fault) = st.faults.iter_mut().find(|f| f.page == page && f.times > 0) {
        fault.times -= 1;
        let fault = fault.clone();
        if let Some(code) = &fault.oai_error {
            let body = oai_error(query, code, "injected fault");
            return (StatusCode::OK, Some(page), xml_response(StatusCode::OK, body));
        }
        let status = StatusCode::from_u16(fault.status.unwrap_or(503)).unwrap_or(StatusCode::SERVICE_UNAVAILABLE);
        let mut resp = (status, "injected fault").into_response();
        if let Some(secs) = fault.retry_after {
            resp.headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        return (status, Some(page), resp);
    }

    if sel.prefix != "oai_dc" {
        let body = oai_error(query, "cannotDisseminateFormat", "only oai_dc is available");
        return (StatusCode::OK, Some(page), xml_response(StatusCode::OK, body));
    }
    let from = sel.from.as_deref().and_then(parse_stamp);
    let until = sel.until.as_deref().and_then(parse_stamp);
    let matching: Vec<&ManifestRecord> = st
        .manifest
        .records
        .iter()
        .filter(|r| sel.set.as_ref().is_none_or(|s| r.sets.iter().any(|x| x == s || x.starts_with(&format!("{s}:")))))
        .filter(|r| {
            let t = parse_stamp(&r.datestamp);
            from.is_none_or(|f| t.is_some_and(|t| t >= f)) && until.is_none_or(|u| t.is_some_and(|t| t <= u))
        })
        .collect();
    if matching.is_empty() {
        let body = oai_error(query, "noRecordsMatch", "no records match");
        return (StatusCode::OK, Some(page), xml_response(StatusCode::OK, body));
    }
    if sel.offset >= matching.len() {
        let body = oai_error(query, "badResumptionToken", "offset out of range");
        return (StatusCode::OK, Some(page), xml_response(StatusCode::OK, body));
    }
    let end = (sel.offset + page_size).min(matching.len());
    let mut body = String::from("<ListRecords>\n");
    for r in &matching[sel.offset..end] {
        body.push_str(&record_xml(r));
        body.push('\n');
    }
    let attrs = format!(
        "completeListSize=\"{}\" cursor=\"{}\"",
        matching.len(),
        sel.offset
    );
    if end < matching.len() {
        let token = encode_token(&sel.prefix, sel.set.as_deref(), sel.from.as_deref(), sel.until.as_deref(), end);
        let _ = write!(body, "<resumptionToken {attrs}>{}</resumptionToken>", escape(&token));
    } else if sel.offset > 0 {
        let _ = write!(body, "<resumptionToken {attrs}/>");
    }
    body.push_str("\n</ListRecords>");
    (StatusCode::OK, Some(page), xml_response(StatusCode::OK, envelope(query, &body)))
}
