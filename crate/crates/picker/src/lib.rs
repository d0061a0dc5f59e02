//! HTTP service behind the interactive area picker.
//!
//! One document per process. Page images and extraction previews are served
//! over a small JSON API; every coordinate on the wire is in pt.
//!
//! - `GET /` minimal built-in picker page
//! - `GET /api/doc` page count and page sizes
//! - `GET /api/pages/{i}/image?dpi=N` PNG of page `i` (1-based, default 144 dpi)
//! - `POST /api/extract` `{page, area: [T, L, B, R], method, col_names}` preview of the first table

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tabex::{extract_tables, Document, ExtractionOptions, MethodChoice, PageRect, TypedTable};

pub const DEFAULT_DPI: u32 = 144;
pub const MAX_DPI: u32 = 600;

const INDEX_HTML: &str = include_str!("../assets/index.html");

/// Rendered PNGs keyed by page and dpi.
type ImageCache = HashMap<(usize, u32), Arc<Vec<u8>>>;

struct AppState {
    doc: Document,
    images: Mutex<ImageCache>,
}

/// An error response: status plus a JSON `{"error": ...}` body.
#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

/// Builds the router for `doc`.
pub fn router(doc: Document) -> Router {
    let state = Arc::new(AppState {
        doc,
        images: Mutex::new(HashMap::new()),
    });
    Router::new()
        .route("/", get(index))
        .route("/api/doc", get(doc_info))
        .route("/api/pages/{page}/image", get(page_image))
        .route("/api/extract", post(extract))
        .with_state(state)
}

/// Serves `doc` on `addr` until ctrl-c.
pub async fn serve(doc: Document, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("picker listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(doc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

async fn doc_info(State(state): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let dims = state.doc.page_dims(None).map_err(internal)?;
    Ok(Json(serde_json::json!({
        "n_pages": state.doc.n_pages(),
        "dims": dims.iter().map(|d| [d.width, d.height]).collect::<Vec<_>>(),
    })))
}

#[derive(Deserialize)]
struct ImageQuery {
    dpi: Option<u32>,
}

fn check_page(doc: &Document, page: usize) -> ApiResult<()> {
    if page == 0 || page > doc.n_pages() {
        Err(ApiError(
            StatusCode::NOT_FOUND,
            format!(
                "page {page} not found (document has {} pages)",
                doc.n_pages()
            ),
        ))
    } else {
        Ok(())
    }
}

async fn page_image(
    State(state): State<Arc<AppState>>,
    Path(page): Path<usize>,
    Query(query): Query<ImageQuery>,
) -> ApiResult<Response> {
    check_page(&state.doc, page)?;
    let dpi = query.dpi.unwrap_or(DEFAULT_DPI);
    if dpi == 0 || dpi > MAX_DPI {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            format!("dpi must be between 1 and {MAX_DPI}"),
        ));
    }
    let cached = state
        .images
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .get(&(page, dpi))
        .cloned();
    let png = match cached {
        Some(png) => png,
        None => {
            let worker = state.clone();
            let png =
                tokio::task::spawn_blocking(move || worker.doc.render_page_png(page, dpi as f64))
                    .await
                    .map_err(internal)?
                    .map_err(internal)?;
            let png = Arc::new(png);
            state
                .images
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .insert((page, dpi), png.clone());
            png
        }
    };
    Ok(([(header::CONTENT_TYPE, "image/png")], png.as_ref().clone()).into_response())
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
pub struct ExtractRequest {
    pub page: usize,
    pub area: Vec<f64>,
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default = "default_true")]
    pub col_names: bool,
}

/// Runs the same extraction as the command line would for one page and area.
pub fn preview(
    doc: &Document,
    request: &ExtractRequest,
) -> Result<Option<TypedTable>, tabex::Error> {
    let [t, l, b, r] = request.area[..] else {
        return Err(tabex::Error::InvalidRect("area needs four numbers".into()));
    };
    let area = PageRect::new(t, l, b, r)?;
    let method: MethodChoice = request.method.as_deref().unwrap_or("decide").parse()?;
    let options = ExtractionOptions {
        pages: Some(vec![request.page]),
        area: Some(vec![area]),
        guess: false,
        method,
        col_names: request.col_names,
        ..Default::default()
    };
    Ok(extract_tables(doc, &options)?
        .first()
        .map(|raw| TypedTable::from_raw(raw, request.col_names)))
}

async fn extract(
    State(state): State<Arc<AppState>>,
    Json(request): Json<ExtractRequest>,
) -> ApiResult<Json<serde_json::Value>> {
    check_page(&state.doc, request.page)?;
    let worker = state.clone();
    let result = tokio::task::spawn_blocking(move || preview(&worker.doc, &request))
        .await
        .map_err(internal)?;
    match result {
        Ok(Some(table)) => Ok(Json(table.to_json_value())),
        Ok(None) => Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "no table found in the selected area".into(),
        )),
        Err(
            e @ (tabex::Error::InvalidRect(_)
            | tabex::Error::AreaOutsidePage { .. }
            | tabex::Error::InvalidOptions(_)),
        ) => Err(ApiError(StatusCode::BAD_REQUEST, e.to_string())),
        Err(e) => Err(internal(e)),
    }
}
