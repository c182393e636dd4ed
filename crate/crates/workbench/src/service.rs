//! Local JSON-over-HTTP API for the design studio.
//!
//! Status codes: 404 unknown resource, 409 stale `If-Match` hash on PUT,
//! 422 invalid document or request, 500 numerical job failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use morphsim::doc;
use morphsim::sim::parse_obj_polylines;
use serde::Serialize;
use tokio::sync::{Mutex, Semaphore};

use crate::config::WorkbenchConfig;
use crate::error::{Result, WorkbenchError};
use crate::jobs::{self, JobRecord, JobRequest, JobStatus};
use crate::project::Project;

pub const MESH_KIND: &str = "polyline_mesh";
pub const ERROR_KIND: &str = "error";
pub const PUT_KIND: &str = "put_result";

struct Inner {
    root: PathBuf,
    config: WorkbenchConfig,
    /// Manifest writes go through this lock.
    project: Mutex<Project>,
    jobs: Mutex<BTreeMap<String, JobRecord>>,
    workers: Arc<Semaphore>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Open (or create) the project and load job records left on disk.
    pub fn open(root: &Path, config: WorkbenchConfig) -> Result<Self> {
        let project = Project::open_or_init(root)?;
        let mut jobs = BTreeMap::new();
        if let Ok(entries) = std::fs::read_dir(root.join(crate::project::JOBS_DIR)) {
            for e in entries.flatten() {
                let f = e.path().join(jobs::JOB_FILE);
                if let Ok(rec) = doc::read_file(&f).map_err(WorkbenchError::from).and_then(|t| JobRecord::from_json(&t)) {
                    // Work interrupted by a restart is not resumed.
                    if matches!(rec.status, JobStatus::Done | JobStatus::Failed) {
                        jobs.insert(rec.id.clone(), rec);
                    }
                }
            }
        }
        Ok(AppState(Arc::new(Inner {
            root: root.to_path_buf(),
            workers: Arc::new(Semaphore::new(config.workers)),
            config,
            project: Mutex::new(project),
            jobs: Mutex::new(jobs),
        })))
    }

    pub fn root(&self) -> &Path {
        &self.0.root
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    status: u16,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    log: Option<&'a [String]>,
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

fn status_of(e: &WorkbenchError) -> StatusCode {
    match e {
        WorkbenchError::NotFound(_) => StatusCode::NOT_FOUND,
        WorkbenchError::Conflict { .. } => StatusCode::CONFLICT,
        WorkbenchError::Input(_) => StatusCode::UNPROCESSABLE_ENTITY,
        WorkbenchError::Numerical(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for WorkbenchError {
    fn into_response(self) -> Response {
        let status = status_of(&self);
        let body = ErrorBody {
            status: status.as_u16(),
            message: self.to_string(),
            log: None,
        };
        json(status, doc::to_json(ERROR_KIND, &body))
    }
}

type Reply = std::result::Result<Response, WorkbenchError>;

fn with_etag(body: String, hash: &str) -> Response {
    let mut r = json(StatusCode::OK, body);
    if let Ok(v) = HeaderValue::from_str(&format!("\"{hash}\"")) {
        r.headers_mut().insert(header::ETAG, v);
    }
    r
}

fn if_match(headers: &HeaderMap) -> Option<String> {
    headers
        .get(header::IF_MATCH)
        .and_then(|v| v.to_str().ok())
        .map(|s| s.trim().trim_matches('"').to_string())
}

#[derive(Serialize)]
struct PutResult<'a> {
    name: &'a str,
    hash: String,
}

async fn get_material(State(s): State<AppState>, UrlPath(name): UrlPath<String>) -> Reply {
    let (text, hash) = s.0.project.lock().await.material_text(&name)?;
    Ok(with_etag(text, &hash))
}

async fn put_material(State(s): State<AppState>, UrlPath(name): UrlPath<String>, headers: HeaderMap, body: String) -> Reply {
    let hash = s.0.project.lock().await.put_material(&name, &body, if_match(&headers).as_deref())?;
    Ok(with_etag(doc::to_json(PUT_KIND, &PutResult { name: &name, hash: hash.clone() }), &hash))
}

async fn get_design(State(s): State<AppState>, UrlPath(name): UrlPath<String>) -> Reply {
    let (text, hash) = s.0.project.lock().await.design_text(&name)?;
    Ok(with_etag(text, &hash))
}

async fn put_design(State(s): State<AppState>, UrlPath(name): UrlPath<String>, headers: HeaderMap, body: String) -> Reply {
    let hash = s.0.project.lock().await.put_design(&name, &body, if_match(&headers).as_deref())?;
    Ok(with_etag(doc::to_json(PUT_KIND, &PutResult { name: &name, hash: hash.clone() }), &hash))
}

fn record_response(rec: &JobRecord, fresh: bool) -> Response {
    match (&rec.status, &rec.error) {
        (JobStatus::Failed, Some(f)) => {
            let status = if f.numerical {
                StatusCode::INTERNAL_SERVER_ERROR
            } else {
                StatusCode::UNPROCESSABLE_ENTITY
            };
            let body = ErrorBody {
                status: status.as_u16(),
                message: f.message.clone(),
                log: Some(&rec.log),
            };
            json(status, doc::to_json(ERROR_KIND, &body))
        }
        _ => json(if fresh { StatusCode::ACCEPTED } else { StatusCode::OK }, rec.to_json()),
    }
}

fn persist(root: &Path, rec: &JobRecord) {
    let _ = doc::write_file(&root.join(JobRecord::rel_path(&rec.id)), &rec.to_json());
}

async fn post_job(State(s): State<AppState>, body: String) -> Reply {
    let req: JobRequest = serde_json::from_str(&body).map_err(|e| WorkbenchError::Input(format!("job request: {e}")))?;
    let (id, hash) = {
        let p = s.0.project.lock().await;
        let hash = jobs::inputs_hash(&p, &s.0.config, &req)?;
        (jobs::job_id(&hash), hash)
    };
    let rec = {
        let mut jobs = s.0.jobs.lock().await;
        if let Some(existing) = jobs.get(&id) {
            // Identical inputs: serve the earlier record.
            return Ok(json(StatusCode::OK, existing.to_json()));
        }
        let rec = JobRecord::queued(&id, req.kind, &hash);
        jobs.insert(id.clone(), rec.clone());
        rec
    };
    persist(s.root(), &rec);
    tokio::spawn(run_job(s.clone(), id, req));
    Ok(record_response(&rec, true))
}

async fn update(s: &AppState, id: &str, f: impl FnOnce(&mut JobRecord)) {
    let rec = {
        let mut jobs = s.0.jobs.lock().await;
        let Some(rec) = jobs.get_mut(id) else { return };
        f(rec);
        rec.clone()
    };
    persist(s.root(), &rec);
}

async fn run_job(s: AppState, id: String, req: JobRequest) {
    let Ok(_permit) = s.0.workers.clone().acquire_owned().await else { return };
    update(&s, &id, |r| {
        let _ = r.advance(JobStatus::Running);
    })
    .await;
    let snapshot = s.0.project.lock().await.clone();
    let config = s.0.config.clone();
    let job_id = id.clone();
    let outcome = tokio::task::spawn_blocking(move || jobs::execute(&snapshot, &config, &job_id, &req))
        .await
        .unwrap_or_else(|e| Err(WorkbenchError::Numerical(format!("job panicked: {e}"))));
    let outcome = match outcome {
        Ok(o) => {
            let mut p = s.0.project.lock().await;
            let applied = (|| {
                if let Some((name, text)) = &o.material {
                    p.put_material(name, text, None)?;
                }
                for (sid, rel) in &o.states {
                    p.register_state(sid, rel)?;
                }
                Ok(())
            })();
            applied.map(|_| o)
        }
        Err(e) => Err(e),
    };
    update(&s, &id, |r| r.finish(outcome)).await;
}

async fn get_job(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply {
    let jobs = s.0.jobs.lock().await;
    let rec = jobs.get(&id).ok_or_else(|| WorkbenchError::NotFound(format!("job {id}")))?;
    Ok(record_response(rec, false))
}

async fn get_state(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply {
    let path = s.0.project.lock().await.state_path(&id)?;
    Ok(json(StatusCode::OK, doc::read_file(&path)?))
}

#[derive(Serialize)]
struct Polyline {
    member: String,
    points: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct MeshBody {
    state: String,
    members: Vec<Polyline>,
}

async fn get_state_mesh(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply {
    let path = s.0.project.lock().await.state_path(&id)?;
    let obj = path.with_extension("obj");
    let members = parse_obj_polylines(&doc::read_file(&obj)?)
        .into_iter()
        .map(|(member, points)| Polyline { member, points })
        .collect();
    Ok(json(StatusCode::OK, doc::to_json(MESH_KIND, &MeshBody { state: id, members })))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/materials/{name}", get(get_material).put(put_material))
        .route("/designs/{name}", get(get_design).put(put_design))
        .route("/jobs", post(post_job))
        .route("/jobs/{id}", get(get_job))
        .route("/states/{id}", get(get_state))
        .route("/states/{id}/mesh", get(get_state_mesh))
        .fallback(|| async { WorkbenchError::NotFound("route".into()) })
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
