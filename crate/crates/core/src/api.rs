//! REST facade over projects, chart edits, path queries and diagrams.
//!
//! Request and response bodies are JSON in the project-file notation.
//! Every mutation works on a copy of the project and only replaces the
//! stored one when the result is valid and persisted, so a 4xx or 5xx
//! response leaves the project untouched. Mutations may send
//! `If-Match: <revision>`; a stale revision gets 409. Responses carry the
//! current revision in `ETag`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::json;

use crate::chart::{BeatId, ChartError, EdgeId, Position, SpecDraft, SpecId};
use crate::diagram::{DiagramError, DiagramKind, IntensitySetting};
use crate::level::{build_demo_chart, world_1_1};
use crate::paths::{waypoint_path, Path, PathError, PathQuery, WeightMode};
use crate::query::{DiagramRequest, ExportFormat, QueryError};
use crate::store::{self, Project, StoreError, FILE_EXTENSION};

pub const DATA_DIR_ENV: &str = "PACEMAKER_DATA_DIR";
pub const DEFAULT_PORT: u16 = 7878;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    fn unknown_project(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "UnknownProject",
            format!("unknown project `{id}`"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "code": self.code, "message": self.message })),
        )
            .into_response()
    }
}

impl From<ChartError> for ApiError {
    fn from(e: ChartError) -> Self {
        let (status, code) = match &e {
            ChartError::UnknownBeat(_) => (StatusCode::NOT_FOUND, "UnknownBeat"),
            ChartError::UnknownSpec(_) => (StatusCode::NOT_FOUND, "UnknownSpec"),
            ChartError::UnknownEdge(_) => (StatusCode::NOT_FOUND, "UnknownEdge"),
            ChartError::SelfLoop(_) => (StatusCode::UNPROCESSABLE_ENTITY, "SelfLoop"),
            ChartError::DuplicateEdge { .. } => (StatusCode::CONFLICT, "DuplicateEdge"),
            ChartError::InvalidSpec(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidSpec"),
            ChartError::AmbiguousBeat(_) => (StatusCode::UNPROCESSABLE_ENTITY, "AmbiguousBeat"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Chart(e) => e.into(),
            PathError::Empty => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "EmptyPath", e.to_string())
            }
            PathError::MissingEdge { .. } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "InvalidPath",
                e.to_string(),
            ),
        }
    }
}

impl From<DiagramError> for ApiError {
    fn from(e: DiagramError) -> Self {
        let (status, code) = match &e {
            DiagramError::InvalidPath { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidPath"),
            DiagramError::MissingSpec(_) => (StatusCode::UNPROCESSABLE_ENTITY, "MissingSpec"),
            DiagramError::UnknownSeries(_) => (StatusCode::NOT_FOUND, "UnknownSeries"),
            DiagramError::BadTimescale(_)
            | DiagramError::BadSetting(_)
            | DiagramError::BadMode(_)
            | DiagramError::BadKind(_) => (StatusCode::BAD_REQUEST, "BadRequest"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::NoPaths => Self::bad_request(e.to_string()),
            QueryError::Path(e) => e.into(),
            QueryError::Diagram(e) => e.into(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "StorageFailure",
            e.to_string(),
        )
    }
}

struct Entry {
    project: Arc<Project>,
    revision: u64,
}

/// Shared service state: all projects in memory, optionally mirrored to
/// `<data dir>/<id>.pace.json`.
#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    data_dir: Option<PathBuf>,
    projects: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
}

impl AppState {
    /// Projects live only as long as the process.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads every `*.pace.json` in `dir` and persists changes there.
    pub fn with_data_dir(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let mut projects = HashMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(FILE_EXTENSION))
            else {
                continue;
            };
            let project = store::load_file(&path)?;
            projects.insert(
                id.to_owned(),
                Arc::new(Mutex::new(Entry {
                    project: Arc::new(project),
                    revision: 1,
                })),
            );
        }
        Ok(Self {
            inner: Arc::new(Inner {
                data_dir: Some(dir),
                projects: RwLock::new(projects),
            }),
        })
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.inner
            .projects
            .read()
            .expect("project map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_project(id))
    }

    /// Current project and revision, without holding any lock afterwards.
    pub fn snapshot(&self, id: &str) -> Option<(Arc<Project>, u64)> {
        let entry = self.entry(id).ok()?;
        let guard = entry.lock().expect("project lock");
        Some((guard.project.clone(), guard.revision))
    }

    fn read(&self, id: &str) -> Result<(Arc<Project>, u64), ApiError> {
        self.snapshot(id)
            .ok_or_else(|| ApiError::unknown_project(id))
    }

    fn persist(&self, id: &str, project: &Project) -> Result<(), StoreError> {
        if let Some(dir) = &self.inner.data_dir {
            store::save_file(project, &dir.join(format!("{id}{FILE_EXTENSION}")))?;
        }
        Ok(())
    }

    /// Applies `change` to a copy of the project; commits only on success.
    fn mutate<T>(
        &self,
        id: &str,
        expected: Option<u64>,
        change: impl FnOnce(&mut Project) -> Result<T, ApiError>,
    ) -> Result<(T, u64), ApiError> {
        let entry = self.entry(id)?;
        let mut guard = entry.lock().expect("project lock");
        if let Some(expected) = expected {
            if expected != guard.revision {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "StaleRevision",
                    format!(
                        "revision {expected} is stale, current is {}",
                        guard.revision
                    ),
                ));
            }
        }
        let mut draft = (*guard.project).clone();
        let out = change(&mut draft)?;
        let violations = draft.chart.validate();
        if !violations.is_empty() {
            return Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "IntegrityError",
                format!("{} invariant violations", violations.len()),
            ));
        }
        self.persist(id, &draft)?;
        guard.project = Arc::new(draft);
        guard.revision += 1;
        Ok((out, guard.revision))
    }

    fn create(&self, project: Project) -> Result<String, ApiError> {
        let id = format!("p-{}", uuid::Uuid::new_v4().simple());
        self.persist(&id, &project)?;
        self.inner
            .projects
            .write()
            .expect("project map lock")
            .insert(
                id.clone(),
                Arc::new(Mutex::new(Entry {
                    project: Arc::new(project),
                    revision: 1,
                })),
            );
        Ok(id)
    }

    fn delete(&self, id: &str) -> Result<(), ApiError> {
        let mut map = self.inner.projects.write().expect("project map lock");
        if !map.contains_key(id) {
            return Err(ApiError::unknown_project(id));
        }
        if let Some(dir) = &self.inner.data_dir {
            let file = dir.join(format!("{id}{FILE_EXTENSION}"));
            if file.exists() {
                std::fs::remove_file(file).map_err(StoreError::from)?;
            }
        }
        map.remove(id);
        Ok(())
    }
}

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    value
        .to_str()
        .ok()
        .map(|v| v.trim().trim_start_matches("W/").trim_matches('"'))
        .and_then(|v| v.parse().ok())
        .map(Some)
        .ok_or_else(|| ApiError::bad_request("If-Match must carry a revision number"))
}

fn with_revision(revision: u64, status: StatusCode, body: impl IntoResponse) -> Response {
    let mut response = (status, body).into_response();
    response.headers_mut().insert(
        header::ETAG,
        HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are valid"),
    );
    response
}

/// Accepts a JSON body, reporting malformed input as our own 400.
struct Body<T>(T);

impl<S, T> axum::extract::FromRequest<S> for Body<T>
where
    T: serde::de::DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

fn double_option<'de, T, D>(de: D) -> Result<Option<Option<T>>, D::Error>
where
    T: Deserialize<'de>,
    D: Deserializer<'de>,
{
    Option::<T>::deserialize(de).map(Some)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project).delete(delete_project))
        .route("/projects/{id}/beats", post(add_beat))
        .route(
            "/projects/{id}/beats/{bid}",
            patch(patch_beat).delete(delete_beat),
        )
        .route("/projects/{id}/edges", post(add_edge))
        .route(
            "/projects/{id}/edges/{eid}",
            patch(patch_edge).delete(delete_edge),
        )
        .route("/projects/{id}/specs", post(add_spec))
        .route(
            "/projects/{id}/specs/{sid}",
            patch(patch_spec).delete(delete_spec),
        )
        .route("/projects/{id}/paths", post(find_path))
        .route(
            "/projects/{id}/snapshots",
            post(take_snapshot).get(list_snapshots),
        )
        .route("/projects/{id}/diagrams/{kind}", get(diagram))
        .route("/projects/{id}/export.csv", get(export_csv))
        .route("/projects/{id}/export.svg", get(export_svg))
        .route("/projects/{id}/demo/mario", get(demo_mario))
        .with_state(state)
}

#[derive(Deserialize)]
struct CreateProject {
    name: String,
    /// `"mario"` seeds the project with the generated demo chart.
    #[serde(default)]
    demo: Option<String>,
}

async fn create_project(
    State(state): State<AppState>,
    Body(body): Body<CreateProject>,
) -> Result<Response, ApiError> {
    let project = match body.demo.as_deref() {
        None => Project::new(body.name.clone()),
        Some("mario") => {
            let mut p = build_demo_chart(&world_1_1()).expect("built-in level is valid");
            p.name.clone_from(&body.name);
            p
        }
        Some(other) => return Err(ApiError::bad_request(format!("unknown demo `{other}`"))),
    };
    let id = state.create(project)?;
    Ok(with_revision(
        1,
        StatusCode::CREATED,
        Json(json!({ "id": id, "name": body.name, "revision": 1 })),
    ))
}

async fn list_projects(State(state): State<AppState>) -> Json<Vec<String>> {
    let mut ids: Vec<String> = state
        .inner
        .projects
        .read()
        .expect("project map lock")
        .keys()
        .cloned()
        .collect();
    ids.sort();
    Json(ids)
}

async fn get_project(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let (project, revision) = state.read(&id)?;
    Ok(with_revision(
        revision,
        StatusCode::OK,
        Json(project.to_document()),
    ))
}

async fn delete_project(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<StatusCode, ApiError> {
    state.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewBeat {
    name: String,
    #[serde(default)]
    spec: Option<String>,
    #[serde(default)]
    position: Option<Position>,
}

async fn add_beat(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(body): Body<NewBeat>,
) -> Result<Response, ApiError> {
    let (beat, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let spec = body
            .spec
            .as_deref()
            .map(|s| p.chart.resolve_spec(s))
            .transpose()?;
        let beat = p.chart.add_beat(body.name, spec)?;
        p.chart.set_position(&beat, body.position)?;
        Ok(p.chart.beat(&beat).cloned().expect("just added"))
    })?;
    Ok(with_revision(revision, StatusCode::CREATED, Json(beat)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeatPatch {
    #[serde(default)]
    name: Option<String>,
    #[serde(default, deserialize_with = "double_option")]
    spec: Option<Option<String>>,
    #[serde(default, deserialize_with = "double_option")]
    position: Option<Option<Position>>,
}

async fn patch_beat(
    State(state): State<AppState>,
    UrlPath((id, bid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(body): Body<BeatPatch>,
) -> Result<Response, ApiError> {
    let (beat, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let beat = BeatId::new(bid);
        if !p.chart.contains_beat(&beat) {
            return Err(ChartError::UnknownBeat(beat.to_string()).into());
        }
        if let Some(name) = body.name {
            p.chart.rename_beat(&beat, name)?;
        }
        if let Some(spec) = body.spec {
            let spec = spec
                .as_deref()
                .map(|s| p.chart.resolve_spec(s))
                .transpose()?;
            p.chart.assign_spec(&beat, spec)?;
        }
        if let Some(position) = body.position {
            p.chart.set_position(&beat, position)?;
        }
        Ok(p.chart.beat(&beat).cloned().expect("checked above"))
    })?;
    Ok(with_revision(revision, StatusCode::OK, Json(beat)))
}

async fn delete_beat(
    State(state): State<AppState>,
    UrlPath((id, bid)): UrlPath<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (removed, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        Ok(p.chart.remove_beat(&BeatId::new(bid))?)
    })?;
    Ok(with_revision(
        revision,
        StatusCode::OK,
        Json(json!({ "removed_edges": removed })),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewEdge {
    from: String,
    to: String,
}

async fn add_edge(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(body): Body<NewEdge>,
) -> Result<Response, ApiError> {
    let (edge, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let from = p.chart.resolve_beat(&body.from)?;
        let to = p.chart.resolve_beat(&body.to)?;
        let edge = p.chart.add_edge(&from, &to)?;
        Ok(p.chart.edge(&edge).cloned().expect("just added"))
    })?;
    Ok(with_revision(revision, StatusCode::CREATED, Json(edge)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgePatch {
    #[serde(default)]
    from: Option<String>,
    #[serde(default)]
    to: Option<String>,
}

async fn patch_edge(
    State(state): State<AppState>,
    UrlPath((id, eid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(body): Body<EdgePatch>,
) -> Result<Response, ApiError> {
    let (edge, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let edge = EdgeId::new(eid);
        let from = body
            .from
            .as_deref()
            .map(|b| p.chart.resolve_beat(b))
            .transpose()?;
        let to = body
            .to
            .as_deref()
            .map(|b| p.chart.resolve_beat(b))
            .transpose()?;
        p.chart.reconnect_edge(&edge, from, to)?;
        Ok(p.chart.edge(&edge).cloned().expect("checked by reconnect"))
    })?;
    Ok(with_revision(revision, StatusCode::OK, Json(edge)))
}

async fn delete_edge(
    State(state): State<AppState>,
    UrlPath((id, eid)): UrlPath<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (edge, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        Ok(p.chart.remove_edge(&EdgeId::new(eid))?)
    })?;
    Ok(with_revision(revision, StatusCode::OK, Json(edge)))
}

async fn add_spec(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(body): Body<SpecDraft>,
) -> Result<Response, ApiError> {
    let (spec, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let spec = p.chart.add_spec(body)?;
        Ok(p.chart.spec(&spec).cloned().expect("just added"))
    })?;
    Ok(with_revision(revision, StatusCode::CREATED, Json(spec)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecPatch {
    name: Option<String>,
    description: Option<String>,
    narrative_intensity: Option<f64>,
    gameplay_intensity: Option<f64>,
    gameplay_category: Option<String>,
    expected_playtime: Option<f64>,
}

async fn patch_spec(
    State(state): State<AppState>,
    UrlPath((id, sid)): UrlPath<(String, String)>,
    headers: HeaderMap,
    Body(body): Body<SpecPatch>,
) -> Result<Response, ApiError> {
    let (spec, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let sid = SpecId::new(sid);
        let current = p
            .chart
            .spec(&sid)
            .cloned()
            .ok_or_else(|| ChartError::UnknownSpec(sid.to_string()))?;
        p.chart.update_spec(
            &sid,
            SpecDraft {
                name: body.name.unwrap_or(current.name),
                description: body.description.unwrap_or(current.description),
                narrative_intensity: body
                    .narrative_intensity
                    .unwrap_or(current.narrative_intensity),
                gameplay_intensity: body
                    .gameplay_intensity
                    .unwrap_or(current.gameplay_intensity),
                gameplay_category: body.gameplay_category.unwrap_or(current.gameplay_category),
                expected_playtime: body.expected_playtime.unwrap_or(current.expected_playtime),
            },
        )?;
        Ok(p.chart.spec(&sid).cloned().expect("checked above"))
    })?;
    Ok(with_revision(revision, StatusCode::OK, Json(spec)))
}

async fn delete_spec(
    State(state): State<AppState>,
    UrlPath((id, sid)): UrlPath<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (unassigned, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        Ok(p.chart.remove_spec(&SpecId::new(sid))?)
    })?;
    Ok(with_revision(
        revision,
        StatusCode::OK,
        Json(json!({ "unassigned_beats": unassigned })),
    ))
}

/// Beat references may be ids or unique names.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRequest {
    start: String,
    #[serde(default)]
    via: Vec<String>,
    end: String,
    #[serde(default)]
    weight_mode: WeightMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAnswer {
    pub exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Path>,
}

async fn find_path(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Body(body): Body<PathRequest>,
) -> Result<Response, ApiError> {
    let (project, revision) = state.read(&id)?;
    let chart = &project.chart;
    let query = PathQuery {
        start: chart.resolve_beat(&body.start)?,
        via: body
            .via
            .iter()
            .map(|b| chart.resolve_beat(b))
            .collect::<Result<_, _>>()?,
        end: chart.resolve_beat(&body.end)?,
        weight_mode: body.weight_mode,
    };
    let path = waypoint_path(chart, &query)?;
    Ok(with_revision(
        revision,
        StatusCode::OK,
        Json(PathAnswer {
            exists: path.is_some(),
            path,
        }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSnapshot {
    label: String,
    beats: Vec<String>,
    #[serde(default)]
    weight_mode: WeightMode,
}

async fn take_snapshot(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    Body(body): Body<NewSnapshot>,
) -> Result<Response, ApiError> {
    let (snapshot, revision) = state.mutate(&id, if_match(&headers)?, |p| {
        let beats = body
            .beats
            .iter()
            .map(|b| p.chart.resolve_beat(b))
            .collect::<Result<Vec<_>, _>>()?;
        let path = Path::from_beats(&p.chart, beats, body.weight_mode)?;
        Ok(p.snapshots.take(path, body.label).clone())
    })?;
    Ok(with_revision(revision, StatusCode::CREATED, Json(snapshot)))
}

async fn list_snapshots(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let (project, revision) = state.read(&id)?;
    let listed: Vec<_> = project
        .snapshots
        .iter()
        .map(|s| {
            json!({
                "snapshot": s,
                "status": crate::paths::validate_snapshot(&project.chart, s),
            })
        })
        .collect();
    Ok(with_revision(revision, StatusCode::OK, Json(listed)))
}

#[derive(Deserialize)]
struct DiagramParams {
    #[serde(default)]
    kind: Option<DiagramKind>,
    paths: String,
    #[serde(default)]
    setting: Option<IntensitySetting>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    timescale: Option<u32>,
    #[serde(default)]
    hidden: Option<String>,
}

impl DiagramParams {
    fn into_request(self, kind: DiagramKind) -> DiagramRequest {
        DiagramRequest {
            kind,
            paths: self.paths,
            setting: self.setting.unwrap_or(IntensitySetting::Computed),
            mode: self.mode.unwrap_or_else(|| "beat".to_owned()),
            timescale: self.timescale,
            hidden: self.hidden,
        }
    }
}

fn params(
    query: Result<Query<DiagramParams>, axum::extract::rejection::QueryRejection>,
) -> Result<DiagramParams, ApiError> {
    query
        .map(|Query(p)| p)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn diagram(
    State(state): State<AppState>,
    UrlPath((id, kind)): UrlPath<(String, String)>,
    query: Result<Query<DiagramParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let (project, revision) = state.read(&id)?;
    let kind: DiagramKind = kind.parse().map_err(|_| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownDiagram",
            format!("no diagram kind `{kind}`"),
        )
    })?;
    let request = params(query)?.into_request(kind);
    let data = request.build(&project)?;
    Ok(with_revision(revision, StatusCode::OK, Json(data)))
}

async fn export(
    state: AppState,
    id: String,
    query: Result<Query<DiagramParams>, axum::extract::rejection::QueryRejection>,
    format: ExportFormat,
) -> Result<Response, ApiError> {
    let (project, revision) = state.read(&id)?;
    let params = params(query)?;
    let kind = params.kind.unwrap_or(DiagramKind::Intensity);
    let bytes = params.into_request(kind).export(&project, format)?;
    let content_type = match format {
        ExportFormat::Csv => "text/csv; charset=utf-8",
        ExportFormat::Svg => "image/svg+xml",
    };
    Ok(with_revision(
        revision,
        StatusCode::OK,
        ([(header::CONTENT_TYPE, content_type)], bytes),
    ))
}

async fn export_csv(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<DiagramParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    export(state, id, query, ExportFormat::Csv).await
}

async fn export_svg(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<DiagramParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    export(state, id, query, ExportFormat::Svg).await
}

/// The generated World 1-1 document; nothing is stored.
async fn demo_mario(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let (_, revision) = state.read(&id)?;
    let demo = build_demo_chart(&world_1_1()).expect("built-in level is valid");
    Ok(with_revision(
        revision,
        StatusCode::OK,
        Json(demo.to_document()),
    ))
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    /// `None` keeps projects in memory only.
    pub data_dir: Option<PathBuf>,
}

impl ServeConfig {
    /// Binds `127.0.0.1:<port>`, storing under `$PACEMAKER_DATA_DIR` when set.
    pub fn from_env(port: u16) -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], port)),
            data_dir: std::env::var_os(DATA_DIR_ENV).map(PathBuf::from),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("storage failure: {0}")]
    StorageFailure(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Runs the service until the process is stopped.
pub async fn serve(config: ServeConfig) -> Result<(), ServeError> {
    let state = match &config.data_dir {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(StoreError::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("data directory {} does not exist", dir.display()),
                ))
                .into());
            }
            AppState::with_data_dir(dir)?
        }
        None => AppState::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServeError::BindFailure {
            addr: config.addr,
            source,
        })?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
