//! HTTP render service: upload a scene once, then re-render it with new lens
//! settings as often as needed.

use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use defocus_core::focus::{FocusEstimate, LensOverrides, SaliencyMap};
use defocus_core::io::{decode_depth, decode_plane, decode_png};
use defocus_core::lens::SWEEP_APERTURES;
use defocus_core::Error;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use uuid::Uuid;

use crate::pipeline::{self, LensSettings, OutputKind, Scene};

pub const DEFAULT_MAX_SESSIONS: usize = 8;
pub const HISTOGRAM_BINS: usize = 32;
const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

/// Immutable once created; renders share it through an `Arc`.
#[derive(Debug)]
pub struct Session {
    pub id: Uuid,
    pub scene: Scene,
    pub default_focus: FocusEstimate,
}

/// Least-recently-used session table; the front is evicted first.
#[derive(Debug)]
pub struct SessionStore {
    capacity: usize,
    sessions: Mutex<IndexMap<Uuid, Arc<Session>>>,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            sessions: Mutex::new(IndexMap::new()),
        }
    }

    /// Inserts `session`, returning the id evicted to make room, if any.
    pub fn insert(&self, session: Session) -> Option<Uuid> {
        let mut map = self.sessions.lock().unwrap();
        let evicted = if map.len() >= self.capacity {
            map.shift_remove_index(0).map(|(id, _)| id)
        } else {
            None
        };
        map.insert(session.id, Arc::new(session));
        evicted
    }

    pub fn get(&self, id: &Uuid) -> Option<Arc<Session>> {
        let mut map = self.sessions.lock().unwrap();
        let index = map.get_index_of(id)?;
        let last = map.len() - 1;
        map.move_index(index, last);
        map.get(id).cloned()
    }

    pub fn remove(&self, id: &Uuid) -> bool {
        self.sessions.lock().unwrap().shift_remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<Uuid> {
        self.sessions.lock().unwrap().keys().copied().collect()
    }
}

pub type AppState = Arc<SessionStore>;

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}/meta", get(session_meta))
        .route("/session/{id}", axum::routing::delete(delete_session))
        .route("/render", post(render))
        .route("/sweep", post(sweep))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .layer(CorsLayer::permissive())
        .with_state(store)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
            },
        }
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"))
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SingularLens { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SessionMeta {
    pub id: Uuid,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub depth_min: f64,
    pub depth_max: f64,
    /// Equal-width bins over `[depth_min, depth_max]`.
    pub depth_histogram: Vec<u64>,
    pub default_focus_distance: f64,
    pub focus_source: String,
}

impl SessionMeta {
    fn of(s: &Session) -> Self {
        let (depth_min, depth_max) = s.scene.depth.range();
        Self {
            id: s.id,
            width: s.scene.image.width(),
            height: s.scene.image.height(),
            channels: s.scene.image.channels(),
            depth_min,
            depth_max,
            depth_histogram: s.scene.depth.histogram(HISTOGRAM_BINS),
            default_focus_distance: s.default_focus.focus_distance,
            focus_source: s.default_focus.source.as_str().to_owned(),
        }
    }
}

fn parse_id(raw: &str) -> ApiResult<Uuid> {
    Uuid::parse_str(raw).map_err(|_| ApiError::unknown_session(raw))
}

fn lookup(store: &SessionStore, raw: &str) -> ApiResult<Arc<Session>> {
    store.get(&parse_id(raw)?).ok_or_else(|| ApiError::unknown_session(raw))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn create_session(State(store): State<AppState>, mut multipart: Multipart) -> ApiResult<(StatusCode, Json<SessionMeta>)> {
    let (mut image, mut depth, mut saliency) = (None, None, None);
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))?;
        match name.as_str() {
            "image" => image = Some(bytes),
            "depth" => depth = Some(bytes),
            "saliency" => saliency = Some(bytes),
            other => {
                return Err(ApiError::bad_request(
                    "malformed_request",
                    format!("unexpected field `{other}`"),
                ))
            }
        }
    }
    let image = image.ok_or_else(|| ApiError::bad_request("missing_parameter", "missing field `image`"))?;
    let depth = depth.ok_or_else(|| ApiError::bad_request("missing_parameter", "missing field `depth`"))?;

    let session = blocking(move || {
        let image = decode_png(&image)?;
        let depth = decode_depth(&depth)?;
        let saliency = saliency
            .map(|b| decode_plane(&b).and_then(SaliencyMap::from_plane))
            .transpose()?;
        let scene = Scene::new(image, depth, saliency)?;
        let default_focus = scene.default_focus()?;
        Ok(Session {
            id: Uuid::new_v4(),
            scene,
            default_focus,
        })
    })
    .await?;
    let meta = SessionMeta::of(&session);
    store.insert(session);
    Ok((StatusCode::CREATED, Json(meta)))
}

async fn session_meta(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<SessionMeta>> {
    let session = lookup(&store, &id)?;
    Ok(Json(SessionMeta::of(&session)))
}

async fn delete_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if store.remove(&parse_id(&id)?) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::unknown_session(&id))
    }
}

/// Lens fields shared by `/render` and `/sweep`. Unset values fall back to
/// the saliency focus and the width-derived defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct RenderRequest {
    pub session_id: String,
    pub f_number: Option<f64>,
    pub focal_length_mm: Option<f64>,
    pub focus_distance: Option<f64>,
    pub focus_scale: Option<f64>,
    pub coc_max_px: Option<f64>,
    pub pixels_per_unit: Option<f64>,
    /// `image` (default), `coc_heatmap` or `in_focus_mask`.
    pub output: Option<String>,
}

impl RenderRequest {
    pub fn settings(&self) -> LensSettings {
        LensSettings {
            overrides: LensOverrides {
                focal_length: self.focal_length_mm,
                f_number: self.f_number,
                focus_distance: self.focus_distance,
                focus_scale: self.focus_scale,
                pixels_per_unit: self.pixels_per_unit,
                coc_max_px: self.coc_max_px,
            },
            exif: None,
            allow_defaults: true,
        }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))
}

fn header_value(v: impl ToString) -> HeaderValue {
    HeaderValue::from_str(&v.to_string()).expect("ascii header")
}

async fn render(State(store): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: RenderRequest = parse_json(&body)?;
    let kind: OutputKind = req.output.as_deref().unwrap_or("image").parse()?;
    let session = lookup(&store, &req.session_id)?;
    let (png, frame) = blocking(move || {
        let frame = pipeline::render(&session.scene, &req.settings())?;
        Ok((frame.encode(kind)?, frame))
    })
    .await?;

    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    for (key, value) in frame.report().entries() {
        let name = format!("x-{}", key.replace('_', "-"));
        headers.insert(HeaderName::try_from(name).expect("valid header name"), header_value(value));
    }
    Ok((headers, png).into_response())
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct SweepRequest {
    #[serde(flatten)]
    pub lens: RenderRequest,
    /// Ascending f-numbers; the eight standard stops when absent.
    pub apertures: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepFrame {
    pub f_number: f64,
    pub signal_energy: f64,
    pub coc_mean: f64,
    pub in_focus_rows: usize,
    /// Base64 PNG of the requested output kind.
    pub png: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepResponse {
    pub focus_distance: f64,
    pub focus_source: String,
    pub blur_monotonicity: f64,
    pub frames: Vec<SweepFrame>,
}

async fn sweep(State(store): State<AppState>, body: Bytes) -> ApiResult<Json<SweepResponse>> {
    let req: SweepRequest = parse_json(&body)?;
    let kind: OutputKind = req.lens.output.as_deref().unwrap_or("image").parse()?;
    let session = lookup(&store, &req.lens.session_id)?;
    let response = blocking(move || {
        let apertures = req.apertures.clone().unwrap_or_else(|| SWEEP_APERTURES.to_vec());
        let sweep = pipeline::sweep(&session.scene, &req.lens.settings(), &apertures)?;
        let frames = sweep
            .frames
            .iter()
            .map(|f| {
                Ok(SweepFrame {
                    f_number: f.lens.params.f_number,
                    signal_energy: f.energy,
                    coc_mean: f.coc_stats().mean,
                    in_focus_rows: f.in_focus_rows().len(),
                    png: base64::engine::general_purpose::STANDARD.encode(f.encode(kind)?),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let first = &sweep.frames[0].lens;
        Ok(SweepResponse {
            focus_distance: first.params.focus_distance,
            focus_source: first.focus_source.as_str().to_owned(),
            blur_monotonicity: sweep.monotonicity,
            frames,
        })
    })
    .await?;
    Ok(Json(response))
}
