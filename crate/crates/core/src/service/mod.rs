//! The query service: repository registry, harvest jobs, cached centrality
//! and plots. [`http`] serves it over HTTP; the `coauthor-net` binary wraps
//! the same operations as command-line subcommands.
//!
//! Each repository index is published as an immutable `Arc` that harvest
//! jobs replace after every page. Readers clone the current `Arc` and work
//! on that point-in-time view without blocking the writer.

mod config;
pub mod http;
mod pipeline;
mod response;
pub mod schema;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tracing::{error, info, warn};

pub use config::{
    is_repository_id, RepositoryEntry, ServiceConfig, ServiceConfigError, DATA_DIR_ENV,
    DEFAULT_LISTEN_ADDRESS, DEFAULT_TOP_K, LISTEN_ADDRESS_ENV,
};
pub use pipeline::{harvest_into_index, IndexingSink};
pub use response::{CentralityResponse, ResponseEntry, ResponseParseError};
pub use schema::{centrality_schema, Schema, SchemaError, ValidationError, CENTRALITY_XSD};

use crate::centrality::{betweenness, betweenness_parallel, top_central, BetweennessResult, EdgeMode};
use crate::index::{self as ix, CoauthorGraph, CoauthorIndex, PartitionKey, SnapshotError};
use crate::oai::{HarvestError, HarvestJob, Harvester, JobHandle, JobState, OaiDatestamp, RepositoryConfig};
use crate::plot::{plot_partition, LayoutConfig, Plot, PlotError};

/// Graphs at least this large are scored with the parallel algorithm.
const PARALLEL_THRESHOLD: usize = 1024;

const REGISTRY_FILE: &str = "repositories.json";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ServiceConfigError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown repository {0:?}")]
    UnknownRepository(String),
    #[error("unknown job {0:?}")]
    UnknownJob(String),
    #[error("repository {0:?} already exists")]
    DuplicateRepository(String),
    #[error("a harvest job is already running for {0:?}")]
    JobRunning(String),
    #[error("partition {0} has no co-authorship data")]
    EmptyPartition(String),
    #[error("harvest failed: {0}")]
    Harvest(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    /// Machine-readable error code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Config(_) => "invalid_config",
            ServiceError::InvalidParameter(_) => "invalid_parameter",
            ServiceError::UnknownRepository(_) => "unknown_repository",
            ServiceError::UnknownJob(_) => "unknown_job",
            ServiceError::DuplicateRepository(_) => "duplicate_repository",
            ServiceError::JobRunning(_) => "job_running",
            ServiceError::EmptyPartition(_) => "empty_partition",
            ServiceError::Harvest(_) => "harvest_failed",
            ServiceError::Snapshot(_) => "snapshot_error",
            ServiceError::Io { .. } => "io_error",
            ServiceError::Internal(_) => "internal_error",
        }
    }

    /// Process exit code for the command-line interface: 1 configuration or
    /// local state, 2 network or harvest failure, 3 unknown repository or
    /// partition.
    pub fn exit_code(&self) -> i32 {
        match self {
            ServiceError::Config(_)
            | ServiceError::DuplicateRepository(_)
            | ServiceError::Snapshot(_)
            | ServiceError::Io { .. }
            | ServiceError::Internal(_) => 1,
            ServiceError::Harvest(_) | ServiceError::JobRunning(_) => 2,
            ServiceError::InvalidParameter(_)
            | ServiceError::UnknownRepository(_)
            | ServiceError::UnknownJob(_)
            | ServiceError::EmptyPartition(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ServiceError + '_ {
    move |source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn bad(msg: impl Into<String>) -> ServiceError {
    ServiceError::InvalidParameter(msg.into())
}

fn parse_partition(ddc: Option<&str>) -> Result<PartitionKey, ServiceError> {
    PartitionKey::from_query(ddc).map_err(|e| bad(format!("ddc: {e}")))
}

/// A validated centrality request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CentralityQuery {
    pub partition: PartitionKey,
    pub top: usize,
    pub mode: EdgeMode,
}

impl CentralityQuery {
    /// Parses raw query-string values; absent values take their defaults.
    pub fn parse(
        ddc: Option<&str>,
        top: Option<&str>,
        mode: Option<&str>,
        default_top: usize,
    ) -> Result<Self, ServiceError> {
        let top = match top {
            None => default_top,
            Some(t) => match t.trim().parse::<usize>() {
                Ok(k) if k >= 1 => k,
                _ => return Err(bad(format!("top must be a positive integer, got {t:?}"))),
            },
        };
        let mode = match mode {
            None => EdgeMode::default(),
            Some(m) => EdgeMode::parse(m.trim())
                .ok_or_else(|| bad(format!("mode must be unweighted or weighted, got {m:?}")))?,
        };
        Ok(CentralityQuery {
            partition: parse_partition(ddc)?,
            top,
            mode,
        })
    }
}

/// A validated plot request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotQuery {
    pub partition: PartitionKey,
    /// How many of the most central authors get labels.
    pub top: usize,
    pub seed: u64,
}

impl PlotQuery {
    pub fn parse(
        ddc: Option<&str>,
        top: Option<&str>,
        seed: Option<&str>,
        default_top: usize,
    ) -> Result<Self, ServiceError> {
        let top = match top {
            None => default_top,
            Some(t) => t
                .trim()
                .parse()
                .map_err(|_| bad(format!("top must be a non-negative integer, got {t:?}")))?,
        };
        let seed = match seed {
            None => LayoutConfig::default().seed,
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| bad(format!("seed must be an unsigned 64-bit integer, got {s:?}")))?,
        };
        Ok(PlotQuery {
            partition: parse_partition(ddc)?,
            top,
            seed,
        })
    }
}

/// Public view of a registered repository.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryStatus {
    pub repository_id: String,
    #[serde(flatten)]
    pub config: RepositoryConfig,
    pub publications: usize,
    pub authors: usize,
    pub coauthor_links: usize,
    pub generation: u64,
    pub ddc_classes: Vec<String>,
    pub last_harvest: Option<DateTime<Utc>>,
    pub active_job: Option<String>,
}

struct Repository {
    entry: RepositoryEntry,
    index: RwLock<Arc<CoauthorIndex>>,
    active_job: Mutex<Option<JobHandle>>,
    /// Start time of the last harvest that completed.
    last_success: Mutex<Option<DateTime<Utc>>>,
}

impl Repository {
    fn current(&self) -> Arc<CoauthorIndex> {
        Arc::clone(&self.index.read().expect("index lock"))
    }

    fn publish(&self, index: &CoauthorIndex) {
        *self.index.write().expect("index lock") = Arc::new(index.clone());
    }
}

type ScoreKey = (String, PartitionKey, EdgeMode, u64);

pub struct Service {
    config: ServiceConfig,
    harvester: Harvester,
    repositories: RwLock<BTreeMap<String, Arc<Repository>>>,
    /// Repositories added at runtime, persisted to the registry file.
    registered: Mutex<Vec<RepositoryEntry>>,
    jobs: RwLock<HashMap<String, JobHandle>>,
    scores: Mutex<HashMap<ScoreKey, Arc<BetweennessResult>>>,
}

impl Service {
    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        Service::with_harvester(config, Harvester::new())
    }

    /// Opens the data directory, loads registered repositories and any saved
    /// index snapshots.
    pub fn with_harvester(config: ServiceConfig, harvester: Harvester) -> Result<Self, ServiceError> {
        config.validate()?;
        let dir = config.data_dir.clone();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(io_err(&probe))?;
        let _ = std::fs::remove_file(&probe);

        let registry_path = dir.join(REGISTRY_FILE);
        let registered: Vec<RepositoryEntry> = match std::fs::read_to_string(&registry_path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| {
                ServiceConfigError::Syntax(format!("{}: {e}", registry_path.display()))
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(&registry_path)(e)),
        };

        let service = Service {
            config,
            harvester,
            repositories: RwLock::new(BTreeMap::new()),
            registered: Mutex::new(Vec::new()),
            jobs: RwLock::new(HashMap::new()),
            scores: Mutex::new(HashMap::new()),
        };
        for entry in service.config.repositories.clone() {
            service.attach(entry)?;
        }
        for entry in registered {
            if service.repositories.read().expect("registry lock").contains_key(&entry.repository_id) {
                warn!(id = %entry.repository_id, "registered repository shadowed by configuration");
                continue;
            }
            entry.validate()?;
            service.attach(entry.clone())?;
            service.registered.lock().expect("registry lock").push(entry);
        }
        Ok(service)
    }

    fn attach(&self, entry: RepositoryEntry) -> Result<(), ServiceError> {
        let id = entry.repository_id.clone();
        let snapshot_path = self.snapshot_path(&id);
        let index = if snapshot_path.exists() {
            let snapshot = ix::load(&snapshot_path)?;
            info!(id = %id, publications = snapshot.publications.len(), "snapshot loaded");
            CoauthorIndex::from_snapshot(snapshot)
        } else {
            CoauthorIndex::new(&id)
        };
        let last_success = std::fs::read_to_string(self.marker_path(&id))
            .ok()
            .and_then(|s| DateTime::parse_from_rfc3339(s.trim()).ok())
            .map(|t| t.with_timezone(&Utc));
        let repo = Repository {
            entry,
            index: RwLock::new(Arc::new(index)),
            active_job: Mutex::new(None),
            last_success: Mutex::new(last_success),
        };
        self.repositories
            .write()
            .expect("registry lock")
            .insert(id, Arc::new(repo));
        Ok(())
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn snapshot_path(&self, repository_id: &str) -> PathBuf {
        self.config.data_dir.join(format!("{repository_id}.snapshot"))
    }

    fn marker_path(&self, repository_id: &str) -> PathBuf {
        self.config.data_dir.join(format!("{repository_id}.last-harvest"))
    }

    fn repository(&self, id: &str) -> Result<Arc<Repository>, ServiceError> {
        self.repositories
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownRepository(id.to_string()))
    }

    pub fn repository_ids(&self) -> Vec<String> {
        self.repositories.read().expect("registry lock").keys().cloned().collect()
    }

    /// Adds a repository at runtime and persists it in the data directory.
    pub fn register(&self, entry: RepositoryEntry) -> Result<RepositoryStatus, ServiceError> {
        entry.validate()?;
        let id = entry.repository_id.clone();
        {
            let mut repos = self.repositories.write().expect("registry lock");
            if repos.contains_key(&id) {
                return Err(ServiceError::DuplicateRepository(id));
            }
            let mut registered = self.registered.lock().expect("registry lock");
            let mut next = registered.clone();
            next.push(entry.clone());
            let path = self.config.data_dir.join(REGISTRY_FILE);
            let tmp = path.with_extension("json.tmp");
            let body = serde_json::to_vec_pretty(&next).map_err(|e| ServiceError::Internal(e.to_string()))?;
            std::fs::write(&tmp, body).map_err(io_err(&tmp))?;
            std::fs::rename(&tmp, &path).map_err(io_err(&path))?;
            *registered = next;
            repos.insert(
                id.clone(),
                Arc::new(Repository {
                    index: RwLock::new(Arc::new(CoauthorIndex::new(&id))),
                    entry,
                    active_job: Mutex::new(None),
                    last_success: Mutex::new(None),
                }),
            );
        }
        info!(id = %id, "repository registered");
        self.status(&id)
    }

    pub fn status(&self, id: &str) -> Result<RepositoryStatus, ServiceError> {
        let repo = self.repository(id)?;
        let index = repo.current();
        let graph = index.subgraph(&PartitionKey::RepositoryWide);
        let active_job = repo
            .active_job
            .lock()
            .expect("job lock")
            .as_ref()
            .filter(|j| !j.state().is_terminal())
            .map(JobHandle::id);
        let last_harvest = *repo.last_success.lock().expect("job lock");
        Ok(RepositoryStatus {
            repository_id: id.to_string(),
            config: repo.entry.config.clone(),
            publications: index.len(),
            authors: graph.node_count(),
            coauthor_links: graph.edge_count(),
            generation: index.generation(),
            ddc_classes: index.ddc_classes().iter().map(|c| c.as_str().to_string()).collect(),
            last_harvest,
            active_job,
        })
    }

    /// The current point-in-time index of a repository.
    pub fn index(&self, id: &str) -> Result<Arc<CoauthorIndex>, ServiceError> {
        Ok(self.repository(id)?.current())
    }

    pub fn job(&self, job_id: &str) -> Result<HarvestJob, ServiceError> {
        self.jobs
            .read()
            .expect("jobs lock")
            .get(job_id)
            .map(JobHandle::snapshot)
            .ok_or_else(|| ServiceError::UnknownJob(job_id.to_string()))
    }

    pub fn job_handle(&self, job_id: &str) -> Result<JobHandle, ServiceError> {
        self.jobs
            .read()
            .expect("jobs lock")
            .get(job_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownJob(job_id.to_string()))
    }

    fn begin_harvest(&self, id: &str) -> Result<(Arc<Repository>, JobHandle), ServiceError> {
        let repo = self.repository(id)?;
        let job = {
            let mut active = repo.active_job.lock().expect("job lock");
            if active.as_ref().is_some_and(|j| !j.state().is_terminal()) {
                return Err(ServiceError::JobRunning(id.to_string()));
            }
            let job = JobHandle::new(HarvestJob::new(id, repo.entry.config.clone()));
            *active = Some(job.clone());
            job
        };
        self.jobs
            .write()
            .expect("jobs lock")
            .insert(job.id(), job.clone());
        Ok((repo, job))
    }

    /// Starts a harvest in the background and returns its job immediately.
    ///
    /// With `incremental`, only records changed since the start of the last
    /// completed harvest are requested.
    pub fn start_harvest(self: &Arc<Self>, id: &str, incremental: bool) -> Result<JobHandle, ServiceError> {
        let (repo, job) = self.begin_harvest(id)?;
        let service = Arc::clone(self);
        let handle = job.clone();
        tokio::spawn(async move {
            if let Err(e) = service.run_harvest(&repo, &handle, incremental).await {
                error!(job = %handle.id(), error = %e, "harvest job ended with an error");
            }
        });
        Ok(job)
    }

    /// Runs a harvest to completion. Fails unless the job completed.
    pub async fn harvest(&self, id: &str, incremental: bool) -> Result<HarvestJob, ServiceError> {
        let (repo, job) = self.begin_harvest(id)?;
        self.run_harvest(&repo, &job, incremental).await?;
        let done = job.snapshot();
        match done.state {
            JobState::Completed => Ok(done),
            _ => Err(ServiceError::Harvest(
                done.error.unwrap_or_else(|| format!("job ended {:?}", done.state)),
            )),
        }
    }

    async fn run_harvest(&self, repo: &Repository, job: &JobHandle, incremental: bool) -> Result<(), ServiceError> {
        let id = repo.entry.repository_id.as_str();
        let mut cfg = repo.entry.config.clone();
        let last_success = *repo.last_success.lock().expect("job lock");
        if let (true, Some(since)) = (incremental, last_success) {
            let granularity = match cfg.until {
                Some(until) => Ok(until.granularity()),
                None => self.harvester.identify(&cfg).await.map(|info| info.granularity),
            };
            match granularity {
                Ok(g) => {
                    cfg.from = Some(OaiDatestamp::at_granularity(since, g));
                    job.update(|j| j.repository.from = cfg.from);
                }
                Err(e) => {
                    job.update(|j| j.start().and_then(|_| j.fail(format!("Identify failed: {e}"))))
                        .map_err(|e| ServiceError::Internal(e.to_string()))?;
                    return Err(ServiceError::Harvest(e.to_string()));
                }
            }
        }

        let started = Utc::now();
        let mut index = CoauthorIndex::clone(&repo.current());
        let before = index.generation();
        let result = harvest_into_index(&self.harvester, &cfg, job, &mut index, |ix| repo.publish(ix)).await;
        repo.publish(&index);
        if let Err(e) = &result {
            warn!(id, error = %e, "harvest failed");
        }

        if index.generation() != before || !self.snapshot_path(id).exists() {
            ix::save(&index.snapshot(), &self.snapshot_path(id))?;
        }
        match result {
            Ok(outcome) if outcome.state == JobState::Completed => {
                *repo.last_success.lock().expect("job lock") = Some(started);
                let marker = self.marker_path(id);
                std::fs::write(&marker, started.to_rfc3339()).map_err(io_err(&marker))?;
                info!(id, records = outcome.records, pages = outcome.pages, "harvest completed");
                Ok(())
            }
            Ok(_) => Ok(()),
            Err(HarvestError::Job(e)) => Err(ServiceError::Internal(e.to_string())),
            Err(e) => Err(ServiceError::Harvest(e.to_string())),
        }
    }

    fn scores(
        &self,
        id: &str,
        index: &CoauthorIndex,
        partition: PartitionKey,
        mode: EdgeMode,
        graph: &CoauthorGraph,
    ) -> Arc<BetweennessResult> {
        let key = (id.to_string(), partition, mode, index.generation());
        if let Some(hit) = self.scores.lock().expect("score cache lock").get(&key) {
            return Arc::clone(hit);
        }
        let result = Arc::new(if graph.node_count() >= PARALLEL_THRESHOLD {
            betweenness_parallel(graph, mode)
        } else {
            betweenness(graph, mode)
        });
        let mut cache = self.scores.lock().expect("score cache lock");
        cache.retain(|(rid, _, _, generation), _| rid != id || *generation == key.3);
        Arc::clone(cache.entry(key).or_insert(result))
    }

    /// The `query.top` most central authors of a partition. An empty
    /// partition yields an empty ranking.
    pub fn centrality(&self, id: &str, query: &CentralityQuery) -> Result<CentralityResponse, ServiceError> {
        let index = self.index(id)?;
        let graph = index.subgraph(&query.partition);
        let scores = self.scores(id, &index, query.partition, query.mode, &graph);
        let ranking = top_central(&scores, &graph, query.top, query.partition);
        Ok(CentralityResponse::from_ranking(id, &ranking, scores.computed_at))
    }

    pub fn plot(&self, id: &str, query: &PlotQuery) -> Result<Plot, ServiceError> {
        let index = self.index(id)?;
        let graph = index.subgraph(&query.partition);
        if graph.is_empty() {
            return Err(ServiceError::EmptyPartition(query.partition.to_string()));
        }
        let scores = self.scores(id, &index, query.partition, EdgeMode::Unweighted, &graph);
        let cfg = LayoutConfig {
            seed: query.seed,
            label_top_k: query.top,
            ..LayoutConfig::default()
        };
        plot_partition(&graph, &scores, query.partition, &cfg).map_err(|e| match e {
            PlotError::EmptyGraph => ServiceError::EmptyPartition(query.partition.to_string()),
            PlotError::InvalidConfig(m) => ServiceError::InvalidParameter(m),
            other => ServiceError::Internal(other.to_string()),
        })
    }
}
