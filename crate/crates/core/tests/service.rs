mod common;

use std::sync::Arc;
use std::time::Duration;

use coauthor_net::service::http::{serve, OMITTED_HEADER, TRUNCATED_HEADER};
use coauthor_net::service::{centrality_schema, CentralityResponse, Service, ServiceConfig};
use common::{manifest, manifest_ranking, quick_harvester, Slice};
use oai_mock::MockServer;
use serde_json::{json, Value};
use tokio::sync::oneshot;

const PNG_MAGIC: [u8; 8] = [0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A];

struct Api {
    base: String,
    client: reqwest::Client,
    _stop: oneshot::Sender<()>,
    _data: tempfile::TempDir,
}

impl Api {
    async fn start() -> Api {
        let data = tempfile::tempdir().unwrap();
        let cfg = ServiceConfig { data_dir: data.path().to_path_buf(), ..ServiceConfig::default() };
        let service = Arc::new(Service::with_harvester(cfg, quick_harvester()).unwrap());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (stop, stopped) = oneshot::channel::<()>();
        tokio::spawn(serve(service, listener, async {
            let _ = stopped.await;
        }));
        Api { base, client: reqwest::Client::new(), _stop: stop, _data: data }
    }

    async fn get(&self, path: &str) -> reqwest::Response {
        self.client.get(format!("{}{path}", self.base)).send().await.unwrap()
    }

    async fn post(&self, path: &str, body: &str) -> reqwest::Response {
        self.client
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .await
            .unwrap()
    }

    async fn register(&self, id: &str, mock: &MockServer, delay_ms: u64) {
        let body = json!({ "repository_id": id, "base_url": mock.base_url(), "polite_delay_ms": delay_ms });
        let resp = self.post("/repositories", &body.to_string()).await;
        assert_eq!(resp.status(), 201);
    }

    async fn harvest(&self, id: &str) -> Value {
        let resp = self.post(&format!("/repositories/{id}/harvest"), "").await;
        assert_eq!(resp.status(), 202);
        let job_id = json_of(resp).await["job_id"].as_str().unwrap().to_string();
        self.wait(&job_id).await
    }

    async fn wait(&self, job_id: &str) -> Value {
        for _ in 0..600 {
            let job = json_of(self.get(&format!("/jobs/{job_id}")).await).await;
            if matches!(job["state"].as_str(), Some("completed" | "failed" | "cancelled")) {
                return job;
            }
            tokio::time::sleep(Duration::from_millis(25)).await;
        }
        panic!("job {job_id} did not finish");
    }
}

async fn json_of(resp: reqwest::Response) -> Value {
    serde_json::from_str(&resp.text().await.unwrap()).unwrap()
}

#[tokio::test]
async fn registration() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    let body = json!({ "repository_id": "e2e", "base_url": mock.base_url() }).to_string();
    let resp = api.post("/repositories", &body).await;
    assert_eq!(resp.status(), 201);
    assert_eq!(resp.headers()["location"], "/repositories/e2e");
    assert_eq!(api.post("/repositories", &body).await.status(), 409);

    for bad in [
        "not json".to_string(),
        json!({ "repository_id": "../x", "base_url": mock.base_url() }).to_string(),
        json!({ "repository_id": "ok", "base_url": "ftp://example.org/oai" }).to_string(),
        json!({ "repository_id": "ok" }).to_string(),
    ] {
        let resp = api.post("/repositories", &bad).await;
        assert_eq!(resp.status(), 400, "{bad}");
        assert!(json_of(resp).await["error"].is_string());
    }

    let listed = json_of(api.get("/repositories").await).await;
    assert_eq!(listed.as_array().unwrap().len(), 1);
    let one = json_of(api.get("/repositories/e2e").await).await;
    assert_eq!(one["publications"], 0);
    assert_eq!(api.get("/repositories/nope").await.status(), 404);
    assert_eq!(api.get("/jobs/nope").await.status(), 404);
    assert_eq!(api.post("/repositories/nope/harvest", "").await.status(), 404);
}

#[tokio::test]
async fn harvest_job_lifecycle() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("harvest_25.json")).unwrap();
    api.register("h25", &mock, 0).await;
    let resp = api.post("/repositories/h25/harvest", "").await;
    assert_eq!(resp.status(), 202);
    let location = resp.headers()["location"].to_str().unwrap().to_string();
    let accepted = json_of(resp).await;
    let job_id = accepted["job_id"].as_str().unwrap();
    assert_eq!(location, format!("/jobs/{job_id}"));
    // The 503 fault with Retry-After keeps the job running for a while.
    assert_eq!(api.post("/repositories/h25/harvest", "").await.status(), 409);
    assert_eq!(api.post("/repositories/h25/harvest?incremental=maybe", "").await.status(), 400);

    let done = api.wait(job_id).await;
    assert_eq!(done["state"], "completed");
    assert_eq!(done["records_received"], 25);
    assert_eq!(done["records_ingested"], 25);
    let status = json_of(api.get("/repositories/h25").await).await;
    assert_eq!(status["publications"], 25);
    assert!(status["last_harvest"].is_string());
    assert!(status["active_job"].is_null());
}

#[tokio::test]
async fn reads_see_whole_pages_during_a_harvest() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    api.register("e2e", &mock, 300).await;
    let resp = api.post("/repositories/e2e/harvest", "").await;
    let job_id = json_of(resp).await["job_id"].as_str().unwrap().to_string();
    let mut seen = Vec::new();
    loop {
        let status = json_of(api.get("/repositories/e2e").await).await;
        seen.push(status["publications"].as_u64().unwrap());
        let job = json_of(api.get(&format!("/jobs/{job_id}")).await).await;
        if job["state"] == "completed" {
            break;
        }
        let centrality = api.get("/repositories/e2e/centrality?format=json").await;
        assert_eq!(centrality.status(), 200);
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    seen.push(json_of(api.get("/repositories/e2e").await).await["publications"].as_u64().unwrap());
    assert!(seen.windows(2).all(|w| w[0] <= w[1]), "{seen:?}");
    assert!(seen.iter().all(|n| [0, 5, 10, 12].contains(n)), "{seen:?}");
    assert_eq!(*seen.last().unwrap(), 12);
    assert!(seen.iter().any(|n| [5, 10].contains(n)), "no intermediate page observed: {seen:?}");
}

#[tokio::test]
async fn centrality_matches_the_fixture_oracle() {
    let m = manifest("e2e_12.json");
    let api = Api::start().await;
    let mock = MockServer::start(m.clone()).unwrap();
    api.register("e2e", &mock, 0).await;
    assert_eq!(api.harvest("e2e").await["state"], "completed");

    for (ddc, slice) in [
        ("004", Slice::Exact("004".into())),
        ("300", Slice::Exact("300".into())),
        ("3", Slice::Main('3')),
        ("", Slice::All),
    ] {
        for top in [1, 3, 5, 20] {
            let partition = if ddc.is_empty() { String::new() } else { format!("ddc={ddc}&") };
            let resp = api.get(&format!("/repositories/e2e/centrality?{partition}top={top}&format=json")).await;
            assert_eq!(resp.status(), 200);
            assert_eq!(resp.headers()["content-type"], "application/json");
            let got = CentralityResponse::from_json(&resp.text().await.unwrap()).unwrap();
            let want = manifest_ranking(&m, &slice, top);
            assert_eq!(got.entries.len(), want.len(), "ddc={ddc} top={top}");
            for (i, (entry, (author, raw, pubs))) in got.entries.iter().zip(&want).enumerate() {
                assert_eq!(entry.rank, i + 1);
                assert_eq!(&entry.author, author, "ddc={ddc} top={top} rank {}", i + 1);
                assert!((entry.raw - raw).abs() < 1e-9);
                assert_eq!(entry.publications, *pubs);
            }
        }
    }
}

#[tokio::test]
async fn xml_and_json_agree_and_validate() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    api.register("e2e", &mock, 0).await;
    api.harvest("e2e").await;
    let schema_text = api.get("/schema/centrality").await.text().await.unwrap();
    let schema = coauthor_net::service::Schema::parse(&schema_text).unwrap();

    for query in ["ddc=004&top=3", "ddc=300", "ddc=3&mode=weighted", "top=50", "ddc=0", "ddc=999"] {
        let resp = api.get(&format!("/repositories/e2e/centrality?{query}")).await;
        assert_eq!(resp.status(), 200, "{query}");
        assert!(resp.headers()["content-type"].to_str().unwrap().starts_with("application/xml"));
        let xml = resp.text().await.unwrap();
        schema.validate(&xml).unwrap_or_else(|e| panic!("{query}: {e:?}"));
        centrality_schema().validate(&xml).unwrap();
        let json = api.get(&format!("/repositories/e2e/centrality?{query}&format=json")).await.text().await.unwrap();
        let from_xml = CentralityResponse::from_xml(&xml).unwrap();
        let from_json = CentralityResponse::from_json(&json).unwrap();
        assert_eq!(from_xml, from_json, "{query}");
    }
}

#[tokio::test]
async fn centrality_parameters() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    api.register("e2e", &mock, 0).await;

    // Well-formed but nothing harvested yet: an empty ranking.
    let resp = api.get("/repositories/e2e/centrality?ddc=004&format=json").await;
    assert_eq!(resp.status(), 200);
    assert!(CentralityResponse::from_json(&resp.text().await.unwrap()).unwrap().entries.is_empty());

    for bad in ["ddc=9999", "ddc=4a", "ddc=", "top=0", "top=-1", "top=x", "mode=directed", "format=csv"] {
        let resp = api.get(&format!("/repositories/e2e/centrality?{bad}")).await;
        assert_eq!(resp.status(), 400, "{bad}");
        assert_eq!(json_of(resp).await["error"], "invalid_parameter");
    }
    assert_eq!(api.get("/repositories/nope/centrality").await.status(), 404);
}

#[tokio::test]
async fn network_plot() {
    let api = Api::start().await;
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    api.register("e2e", &mock, 0).await;

    let resp = api.get("/repositories/e2e/network.png?ddc=004").await;
    assert_eq!(resp.status(), 404);
    assert_eq!(json_of(resp).await["error"], "empty_partition");

    api.harvest("e2e").await;
    let resp = api.get("/repositories/e2e/network.png?ddc=004&seed=7").await;
    assert_eq!(resp.status(), 200);
    assert_eq!(resp.headers()["content-type"], "image/png");
    assert_eq!(resp.headers()[TRUNCATED_HEADER], "false");
    assert_eq!(resp.headers()[OMITTED_HEADER], "0");
    let first = resp.bytes().await.unwrap();
    assert_eq!(first[..8], PNG_MAGIC);
    let again = api.get("/repositories/e2e/network.png?ddc=004&seed=7").await.bytes().await.unwrap();
    assert_eq!(first, again);

    assert_eq!(api.get("/repositories/e2e/network.png?ddc=700").await.status(), 404);
    assert_eq!(api.get("/repositories/e2e/network.png?seed=-3").await.status(), 400);
}

#[tokio::test]
async fn schema_endpoint() {
    let api = Api::start().await;
    let resp = api.get("/schema/centrality").await;
    assert_eq!(resp.status(), 200);
    let text = resp.text().await.unwrap();
    assert_eq!(text, coauthor_net::service::CENTRALITY_XSD);
}

#[tokio::test]
async fn restart_reloads_snapshot_and_registry() {
    let data = tempfile::tempdir().unwrap();
    let mock = MockServer::start(manifest("e2e_12.json")).unwrap();
    let cfg = ServiceConfig { data_dir: data.path().to_path_buf(), ..ServiceConfig::default() };
    let before = {
        let service = Service::with_harvester(cfg.clone(), quick_harvester()).unwrap();
        let entry = serde_json::from_value(json!({ "repository_id": "e2e", "base_url": mock.base_url(), "polite_delay_ms": 0 })).unwrap();
        service.register(entry).unwrap();
        service.harvest("e2e", false).await.unwrap();
        service.index("e2e").unwrap()
    };
    let service = Service::with_harvester(cfg, quick_harvester()).unwrap();
    let after = service.index("e2e").unwrap();
    assert_eq!(after.publications(), before.publications());
    assert!(service.status("e2e").unwrap().last_harvest.is_some());
}
