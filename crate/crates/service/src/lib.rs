//! HTTP front end: hosts simulated top-k databases, each with its own
//! reranking session, and runs experiments and the exactness suite.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/health` | | `ok` |
//! | POST | `/databases` | `CreateDatabase` | `DatabaseInfo` |
//! | GET | `/databases` | | `[DatabaseInfo]` |
//! | GET, DELETE | `/databases/{id}` | | `DatabaseInfo` |
//! | POST | `/databases/{id}/rerank` | `RerankRequest` | `RerankResponse` |
//! | GET, PUT | `/databases/{id}/index` | index snapshot text | snapshot / `DatabaseInfo` |
//! | POST | `/bench` | `BenchRequest` | `BenchResponse` |
//! | POST | `/verify` | `VerifyRequest` | `VerifyReport` |

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rerank_core::access::{SimulatedDatabase, SystemRanking, TopKInterface};
use rerank_core::api::{
    BenchRequest, BenchResponse, CreateDatabase, DatabaseInfo, ErrorBody, RerankRequest,
    RerankResponse, VerifyRequest,
};
use rerank_core::bench::{exactness_suite, run_experiment, SchemaSpec, VerifyReport};
use rerank_core::config::{DenseIndexParams, RerankConfig};
use rerank_core::model::RankingFunction;
use rerank_core::session::Session;
use rerank_core::{snapshot, Error};
use tokio::net::TcpListener;

/// Largest exactness run accepted over HTTP.
pub const MAX_VERIFY_INSTANCES: usize = 10_000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn not_found(id: u64) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: format!("no database with id {id}"),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Verification(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            Error::Indistinguishable { .. } => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ErrorBody {
                error: self.message,
            }),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct Hosted {
    id: u64,
    spec: SchemaSpec,
    system_ranking: String,
    db: Arc<SimulatedDatabase>,
    session: Session,
}

impl Hosted {
    fn info(&self) -> DatabaseInfo {
        DatabaseInfo {
            id: self.id,
            n: self.db.len(),
            system_k: self.db.system_k(),
            system_ranking: self.system_ranking.clone(),
            schema: self.spec.clone(),
            queries: self.db.ledger().total(),
            indexed_regions: self.session.indexes.one_d.len() + self.session.indexes.md.len(),
        }
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    databases: Arc<Mutex<BTreeMap<u64, Arc<Mutex<Hosted>>>>>,
    next_id: Arc<AtomicU64>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    fn get(&self, id: u64) -> ApiResult<Arc<Mutex<Hosted>>> {
        self.databases
            .lock()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker failed: {e}"),
    })?
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/databases", post(create_database).get(list_databases))
        .route("/databases/{id}", get(database_info).delete(drop_database))
        .route("/databases/{id}/rerank", post(rerank))
        .route("/databases/{id}/index", get(get_index).put(put_index))
        .route("/bench", post(bench))
        .route("/verify", post(verify))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(AppState::new())).await
}

async fn create_database(
    State(state): State<AppState>,
    Json(req): Json<CreateDatabase>,
) -> ApiResult<(StatusCode, Json<DatabaseInfo>)> {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let hosted = blocking(move || {
        let data = req.source.load()?;
        let system = SystemRanking::parse(&req.system_ranking, &data.schema)?;
        let n = data.len().max(1);
        let d = DenseIndexParams::defaults(n, req.system_k);
        let params =
            DenseIndexParams::new(req.index_c.unwrap_or(d.c), req.index_s.unwrap_or(d.s), n)?;
        let mut cfg = RerankConfig::new(params).with_ties(req.ties);
        cfg.queue = req.queue;
        cfg.ta_sorted_access = req.ta_sorted_access;
        let spec = SchemaSpec::from_schema(&data.schema);
        let db = Arc::new(
            data.database(system.clone(), req.system_k)?
                .with_order_by(req.order_by),
        );
        let session = Session::new(db.clone(), cfg);
        Ok(Hosted {
            id,
            spec,
            system_ranking: system.describe(&data.schema),
            db,
            session,
        })
    })
    .await?;
    let info = hosted.info();
    tracing::info!(id, n = info.n, "database created");
    state
        .databases
        .lock()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(hosted)));
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_databases(State(state): State<AppState>) -> Json<Vec<DatabaseInfo>> {
    let all: Vec<_> = state.databases.lock().unwrap().values().cloned().collect();
    Json(all.iter().map(|h| h.lock().unwrap().info()).collect())
}

async fn database_info(
    State(state): State<AppState>,
    Path(id): Path<u64>,
) -> ApiResult<Json<DatabaseInfo>> {
    let h = state.get(id)?;
    let info = h.lock().unwrap().info();
    Ok(Json(info))
}

async fn drop_database(
    State(state): State<AppState>,
    Path(id): Path<u64>,
) -> ApiResult<Json<DatabaseInfo>> {
    let h = state
        .databases
        .lock()
        .unwrap()
        .remove(&id)
        .ok_or_else(|| ApiError::not_found(id))?;
    let info = h.lock().unwrap().info();
    Ok(Json(info))
}

async fn rerank(
    State(state): State<AppState>,
    Path(id): Path<u64>,
    Json(req): Json<RerankRequest>,
) -> ApiResult<Json<RerankResponse>> {
    let h = state.get(id)?;
    let res = blocking(move || {
        let mut h = h.lock().unwrap();
        let schema = h.db.schema().clone();
        let f = RankingFunction::parse(&req.ranking, &schema)?;
        let q = req.query.resolve(&schema)?;
        if req.h == 0 {
            return Err(Error::InvalidQuery("h must be at least 1".into()).into());
        }
        let query_id = h.session.next_query_id();
        let r = h.session.run_topk(req.algorithm, &q, &f, req.h)?;
        tracing::debug!(id, query_id, algorithm = %req.algorithm, cost = r.total().total(), "reranked");
        Ok(RerankResponse { query_id, tuples: r.tuples.clone(), short: r.short, step_costs: r.costs.clone(), total: r.total() })
    })
    .await?;
    Ok(Json(res))
}

async fn get_index(State(state): State<AppState>, Path(id): Path<u64>) -> ApiResult<String> {
    let h = state.get(id)?;
    let h = h.lock().unwrap();
    Ok(snapshot::save(&h.session.indexes, h.db.schema()))
}

async fn put_index(
    State(state): State<AppState>,
    Path(id): Path<u64>,
    body: String,
) -> ApiResult<Json<DatabaseInfo>> {
    let h = state.get(id)?;
    let info = blocking(move || {
        let mut h = h.lock().unwrap();
        let by_id: BTreeMap<_, _> = h.db.tuples().iter().map(|t| (t.id, t.clone())).collect();
        let idx = snapshot::load(&body, h.db.schema(), &|id| by_id.get(&id).cloned())?;
        h.session.indexes = idx;
        Ok(h.info())
    })
    .await?;
    Ok(Json(info))
}

async fn bench(Json(req): Json<BenchRequest>) -> ApiResult<Json<BenchResponse>> {
    let res = blocking(move || {
        let data = req.source.load()?;
        let wl = req.workload_for(&data)?;
        let report = run_experiment(&req.experiment, &data, &wl)?;
        Ok(BenchResponse {
            csv: report.to_csv(),
            summary: report.summary(),
        })
    })
    .await?;
    Ok(Json(res))
}

async fn verify(Json(req): Json<VerifyRequest>) -> ApiResult<Json<VerifyReport>> {
    if req.instances > MAX_VERIFY_INSTANCES {
        return Err(ApiError {
            status: StatusCode::BAD_REQUEST,
            message: format!("at most {MAX_VERIFY_INSTANCES} instances per request"),
        });
    }
    let report = blocking(move || Ok(exactness_suite(req.instances, req.seed)?)).await?;
    Ok(Json(report))
}
