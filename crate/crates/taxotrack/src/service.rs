//! HTTP/JSON API over the dataset registry.
//!
//! Node scores, loaded datasets and comparison reports are cached per
//! `(dataset, analytics config hash, ...)` key. Concurrent requests for the
//! same key share one computation, and heavy work runs on a bounded pool of
//! blocking workers.

use std::collections::HashMap;
use std::future::Future;
use std::hash::Hash;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{OnceCell, Semaphore};
use taxotrack_core::comparison::{extract_sample_with, sample_pair};
use taxotrack_core::outlier::{NodeScores, ScoreTable};
use taxotrack_core::{Combination, FrequencyMatrix, IngestionReport, TaxonomyNode, Variable, Zone};

use crate::config::AppConfig;
use crate::error::{AppError, AppResult};
use crate::io::IngestConfig;
use crate::pipeline;
use crate::registry::{DatasetEntry, LoadedDataset, Registry};

type Cell<V> = Arc<OnceCell<Arc<V>>>;

/// Single-flight memo: the first caller for a key computes, others await it.
/// Failed computations are not cached.
struct Flight<K, V> {
    cells: Mutex<HashMap<K, Cell<V>>>,
}

impl<K: Eq + Hash, V> Flight<K, V> {
    fn new() -> Self {
        Self { cells: Mutex::new(HashMap::new()) }
    }

    async fn get<F, Fut>(&self, key: K, init: F) -> AppResult<Arc<V>>
    where
        F: FnOnce() -> Fut,
        Fut: Future<Output = AppResult<V>>,
    {
        let cell = self.cells.lock().expect("cache lock").entry(key).or_default().clone();
        cell.get_or_try_init(|| async { init().await.map(Arc::new) }).await.cloned()
    }
}

struct Inner {
    config: AppConfig,
    analytics_hash: String,
    registry: Registry,
    workers: Semaphore,
    datasets: Flight<String, LoadedDataset>,
    nodes: Flight<(String, String, TaxonomyNode), NodeScores>,
    compares: Flight<(String, String, Combination, Zone, Zone), Vec<u8>>,
    session_lock: tokio::sync::Mutex<()>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: AppConfig) -> AppResult<Self> {
        config.validate()?;
        let registry = Registry::open(&config.data_dir)?;
        Ok(AppState(Arc::new(Inner {
            analytics_hash: config.analytics_hash(),
            workers: Semaphore::new(config.workers),
            registry,
            config,
            datasets: Flight::new(),
            nodes: Flight::new(),
            compares: Flight::new(),
            session_lock: tokio::sync::Mutex::new(()),
        })))
    }

    pub fn config(&self) -> &AppConfig {
        &self.0.config
    }

    async fn blocking<T, F>(&self, f: F) -> AppResult<T>
    where
        T: Send + 'static,
        F: FnOnce() -> AppResult<T> + Send + 'static,
    {
        let _permit = self.0.workers.acquire().await.map_err(|e| AppError::Worker(e.to_string()))?;
        tokio::task::spawn_blocking(f).await.map_err(|e| AppError::Worker(e.to_string()))?
    }

    async fn dataset(&self, id: &str) -> AppResult<Arc<LoadedDataset>> {
        let entry = self.0.registry.get(id)?;
        let this = self.clone();
        self.0
            .datasets
            .get(id.to_string(), || async move {
                let s = this.clone();
                this.blocking(move || s.0.registry.load(&entry)).await
            })
            .await
    }

    async fn node_scores(&self, id: &str, node: TaxonomyNode) -> AppResult<Arc<NodeScores>> {
        let data = self.dataset(id).await?;
        let dbos = self.0.config.dbos.clone();
        let this = self.clone();
        let key = (id.to_string(), self.0.analytics_hash.clone(), node);
        self.0
            .nodes
            .get(key, || async move {
                this.blocking(move || Ok(taxotrack_core::outlier::score_node(&data.vectors, node, &dbos)?)).await
            })
            .await
    }

    async fn zoned(&self, id: &str, combo: Combination) -> AppResult<Vec<taxotrack_core::ZonedScore>> {
        let data = self.dataset(id).await?;
        let x = self.node_scores(id, combo.x_node()).await?;
        let y = self.node_scores(id, combo.y_node()).await?;
        Ok(pipeline::zoned(&data.vectors, combo, &x, &y))
    }

    async fn heatmap(&self, id: &str) -> AppResult<FrequencyMatrix> {
        let data = self.dataset(id).await?;
        let mut set = tokio::task::JoinSet::new();
        for node in TaxonomyNode::ALL {
            let (s, id) = (self.clone(), id.to_string());
            set.spawn(async move { s.node_scores(&id, node).await.map(|n| (node, n)) });
        }
        let mut nodes = std::collections::BTreeMap::new();
        while let Some(res) = set.join_next().await {
            let (node, scores) = res.map_err(|e| AppError::Worker(e.to_string()))??;
            nodes.insert(node, (*scores).clone());
        }
        let table = ScoreTable { trajectory_ids: pipeline::ids(&data.vectors), nodes };
        Ok(FrequencyMatrix::from_table(&table))
    }

    async fn compare(&self, id: &str, combo: Combination, a: Zone, b: Zone) -> AppResult<Arc<Vec<u8>>> {
        if a == b {
            return Err(taxotrack_core::Error::IdenticalZones(a as u8).into());
        }
        let data = self.dataset(id).await?;
        let zoned = self.zoned(id, combo).await?;
        let forest = self.0.config.forest.clone();
        let this = self.clone();
        let key = (id.to_string(), self.0.analytics_hash.clone(), combo, a, b);
        self.0
            .compares
            .get(key, || async move {
                this.blocking(move || {
                    let report = pipeline::compare(&data.vectors, &zoned, combo, (a, b), &forest)?;
                    Ok(serde_json::to_vec(&report)?)
                })
                .await
            })
            .await
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.class().status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(serde_json::json!({ "error": self.body() }))).into_response()
    }
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> AppResult<T> {
    serde_json::from_slice(body).map_err(|e| AppError::bad_input(format!("malformed JSON body: {e}")))
}

pub fn router(state: AppState) -> Router {
    let ui_dir = state.config().ui_dir.clone();
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/schema", get(schema))
        .route("/api/datasets", get(list_datasets).post(create_dataset))
        .route("/api/datasets/{id}", get(get_dataset))
        .route("/api/datasets/{id}/heatmap", get(heatmap))
        .route("/api/datasets/{id}/scores", get(scores))
        .route("/api/datasets/{id}/compare", post(compare))
        .route("/api/datasets/{id}/trajectories", get(trajectory_ids))
        .route("/api/datasets/{id}/trajectories/{tid}", get(trajectory))
        .route("/api/datasets/{id}/sample", get(sample))
        .route("/api/datasets/{id}/sample-pair", get(sample_pair_handler))
        .route("/api/session", get(get_session).put(put_session))
        .with_state(state);
    if ui_dir.is_dir() {
        api.fallback_service(tower_http::services::ServeDir::new(ui_dir))
    } else {
        api.fallback(|| async {
            let body = serde_json::json!({ "error": { "code": "not_found", "message": "no such route" } });
            (StatusCode::NOT_FOUND, Json(body))
        })
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "name": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
    }))
}

pub const SCHEMA_VERSION: u32 = 1;

async fn schema() -> Json<serde_json::Value> {
    Json(crate::schema::schema())
}

async fn list_datasets(State(s): State<AppState>) -> Json<Vec<DatasetEntry>> {
    Json(s.0.registry.list())
}

async fn get_dataset(State(s): State<AppState>, Path(id): Path<String>) -> AppResult<Json<DatasetEntry>> {
    Ok(Json(s.0.registry.get(&id)?))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateDataset {
    name: Option<String>,
    /// Server-side file to ingest.
    path: Option<PathBuf>,
    /// Inline file content.
    content: Option<String>,
    ingest: Option<IngestConfig>,
}

#[derive(Serialize)]
struct Created {
    entry: DatasetEntry,
    report: IngestionReport,
    created: bool,
}

async fn create_dataset(State(s): State<AppState>, headers: HeaderMap, req: Request) -> AppResult<Response> {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    let (raw, name, ingest) = if content_type.starts_with("multipart/form-data") {
        let mut mp = Multipart::from_request(req, &()).await.map_err(|e| AppError::bad_input(e.body_text()))?;
        let (mut raw, mut name, mut ingest) = (None, None, None);
        while let Some(field) = mp.next_field().await.map_err(|e| AppError::bad_input(e.body_text()))? {
            match field.name().unwrap_or("") {
                "file" => {
                    name = name.or_else(|| field.file_name().map(str::to_string));
                    raw = Some(field.bytes().await.map_err(|e| AppError::bad_input(e.body_text()))?.to_vec());
                }
                "name" => name = Some(field.text().await.map_err(|e| AppError::bad_input(e.body_text()))?),
                "ingest" => {
                    let text = field.text().await.map_err(|e| AppError::bad_input(e.body_text()))?;
                    ingest = Some(parse_json::<IngestConfig>(text.as_bytes())?);
                }
                other => return Err(AppError::bad_input(format!("unexpected multipart field `{other}`"))),
            }
        }
        let raw = raw.ok_or_else(|| AppError::bad_input("multipart upload needs a `file` field"))?;
        (raw, name.unwrap_or_else(|| "upload".into()), ingest)
    } else {
        let body = Bytes::from_request(req, &()).await.map_err(|e| AppError::bad_input(e.body_text()))?;
        let req: CreateDataset = parse_json(&body)?;
        let (raw, default_name) = match (req.path, req.content) {
            (Some(p), None) => {
                let raw = std::fs::read(&p).map_err(|e| AppError::bad_input(format!("cannot read {}: {e}", p.display())))?;
                let n = p.file_name().map_or_else(|| "dataset".into(), |n| n.to_string_lossy().into_owned());
                (raw, n)
            }
            (None, Some(c)) => (c.into_bytes(), "inline".to_string()),
            _ => return Err(AppError::bad_input("give exactly one of `path` or `content`")),
        };
        (raw, req.name.unwrap_or(default_name), req.ingest)
    };
    let ingest = ingest.unwrap_or_else(|| s.0.config.ingest.clone());
    let this = s.clone();
    let (entry, created) = s
        .blocking(move || {
            let (entry, _, created) = this.0.registry.insert(&raw, &name, &ingest)?;
            Ok((entry, created))
        })
        .await?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    let report = entry.report.clone();
    Ok((status, Json(Created { entry, report, created })).into_response())
}

async fn heatmap(State(s): State<AppState>, Path(id): Path<String>) -> AppResult<Json<FrequencyMatrix>> {
    Ok(Json(s.heatmap(&id).await?))
}

#[derive(Deserialize)]
struct ComboQuery {
    combo: String,
}

async fn scores(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<ComboQuery>) -> AppResult<Response> {
    let combo: Combination = q.combo.parse()?;
    Ok(Json(s.zoned(&id, combo).await?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareBody {
    combo: String,
    zone_a: u8,
    zone_b: u8,
}

async fn compare(State(s): State<AppState>, Path(id): Path<String>, body: Bytes) -> AppResult<Response> {
    let body: CompareBody = parse_json(&body)?;
    let combo: Combination = body.combo.parse()?;
    let (a, b) = (Zone::from_index(body.zone_a)?, Zone::from_index(body.zone_b)?);
    let bytes = s.compare(&id, combo, a, b).await?;
    Ok(json_bytes((*bytes).clone()))
}

async fn trajectory_ids(State(s): State<AppState>, Path(id): Path<String>) -> AppResult<Json<Vec<String>>> {
    let data = s.dataset(&id).await?;
    Ok(Json(data.dataset.ids().map(str::to_string).collect()))
}

async fn trajectory(State(s): State<AppState>, Path((id, tid)): Path<(String, String)>) -> AppResult<Response> {
    let data = s.dataset(&id).await?;
    let t = data.dataset.get(&tid).ok_or_else(|| taxotrack_core::Error::UnknownTrajectory(tid.clone()))?;
    Ok(Json(t).into_response())
}

#[derive(Deserialize)]
struct SampleQuery {
    tid: String,
    variable: String,
}

async fn sample(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<SampleQuery>) -> AppResult<Response> {
    let variable = Variable::parse(&q.variable)?;
    let data = s.dataset(&id).await?;
    let t = data.dataset.get(&q.tid).ok_or_else(|| taxotrack_core::Error::UnknownTrajectory(q.tid.clone()))?;
    let sc = s.0.config.sample;
    Ok(Json(extract_sample_with(t, variable, sc.before, sc.after)?).into_response())
}

#[derive(Deserialize)]
struct SamplePairQuery {
    a: String,
    b: String,
    variable: String,
}

async fn sample_pair_handler(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SamplePairQuery>,
) -> AppResult<Response> {
    let variable = Variable::parse(&q.variable)?;
    let data = s.dataset(&id).await?;
    let get = |tid: &str| data.dataset.get(tid).ok_or_else(|| taxotrack_core::Error::UnknownTrajectory(tid.to_string()));
    let sc = s.0.config.sample;
    Ok(Json(sample_pair(get(&q.a)?, get(&q.b)?, variable, sc.before, sc.after)?).into_response())
}

/// Analyst selections persisted across restarts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionState {
    pub dataset: Option<String>,
    pub combination: Option<Combination>,
    pub trajectories: Vec<String>,
    pub zones: Vec<Zone>,
    pub variable: Option<Variable>,
}

impl AppState {
    fn session_path(&self) -> PathBuf {
        self.0.config.data_dir.join("session.json")
    }

    async fn validate_session(&self, session: &SessionState) -> AppResult<()> {
        if session.trajectories.len() > 2 || session.zones.len() > 2 {
            return Err(AppError::bad_input("at most two trajectories and two zones can be selected"));
        }
        if session.zones.len() == 2 && session.zones[0] == session.zones[1] {
            return Err(taxotrack_core::Error::IdenticalZones(session.zones[0] as u8).into());
        }
        match &session.dataset {
            Some(id) => {
                let data = self.dataset(id).await?;
                for tid in &session.trajectories {
                    if data.dataset.get(tid).is_none() {
                        return Err(taxotrack_core::Error::UnknownTrajectory(tid.clone()).into());
                    }
                }
            }
            None if !session.trajectories.is_empty() => {
                return Err(AppError::bad_input("trajectories selected without a dataset"));
            }
            None => {}
        }
        Ok(())
    }
}

async fn get_session(State(s): State<AppState>) -> AppResult<Json<SessionState>> {
    let _guard = s.0.session_lock.lock().await;
    let session = match std::fs::read(s.session_path()) {
        Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_default(),
        Err(_) => SessionState::default(),
    };
    // selections that no longer match the registry are dropped
    if s.validate_session(&session).await.is_err() {
        return Ok(Json(SessionState::default()));
    }
    Ok(Json(session))
}

async fn put_session(State(s): State<AppState>, body: Bytes) -> AppResult<Json<SessionState>> {
    let session: SessionState = parse_json(&body)?;
    s.validate_session(&session).await?;
    let _guard = s.0.session_lock.lock().await;
    std::fs::write(s.session_path(), serde_json::to_vec_pretty(&session)?)?;
    Ok(Json(session))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: AppConfig) -> AppResult<()> {
    let listen = config.listen.clone();
    let state = AppState::new(config)?;
    let listener = tokio::net::TcpListener::bind(&listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
