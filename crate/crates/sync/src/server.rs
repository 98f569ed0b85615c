//! Axum service over a data directory.

use std::collections::HashMap;
use std::io;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use medgraph_core::anthro::{format_z, legacy_symbol, z_value, zscore};
use medgraph_core::chart::{growth_chart_spec, render_svg, RenderOptions};
use medgraph_core::records::{Patient, RecordStore, RecordsError, Visit, MUAC_CM, OEDEMA, WEIGHT_KG};
use medgraph_core::rules::{recommend_program, rutf_rations, Oedema};
use medgraph_core::standards::{Catalog, CatalogError, Indicator, Sex, XUnit};
use medgraph_core::{Dataset, NutritionInputs, Palette, RationTable};
use serde::Deserialize;
use tokio::net::TcpListener;

use crate::api::{ApiError, ChartPoint, ChartResponse, RecommendationInputs, RecommendationResponse};
use crate::layout::DataDir;
use crate::DIGEST_HEADER;

/// Everything a request handler needs.
#[derive(Debug)]
pub struct AppState {
    pub catalog: Catalog,
    pub records: RecordStore,
    pub rations: Option<RationTable>,
    pub default_palette: String,
}

impl AppState {
    /// Opens the catalog, record store and optional ration table of `dir`.
    pub fn open(dir: &DataDir, default_palette: &str) -> io::Result<Self> {
        let other = |e: String| io::Error::other(e);
        let catalog = Catalog::open(dir.standards()).map_err(|e| other(e.to_string()))?;
        let records = RecordStore::open(dir.records()).map_err(|e| other(e.to_string()))?;
        let rations = match std::fs::read_to_string(dir.rations()) {
            Ok(text) => {
                Some(RationTable::parse(&text).map_err(|e| other(format!("{}: {e}", dir.rations().display())))?)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(e),
        };
        if Palette::builtin_named(default_palette).is_none() {
            return Err(other(format!("unknown palette `{default_palette}`")));
        }
        Ok(AppState {
            catalog,
            records,
            rations,
            default_palette: default_palette.to_string(),
        })
    }
}

type Shared = Arc<AppState>;

/// Error response: status plus a machine-readable reason.
#[derive(Debug)]
pub struct Failure(StatusCode, ApiError);

impl Failure {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Failure(
            status,
            ApiError {
                error: error.to_string(),
                message: message.into(),
            },
        )
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        if self.0.is_server_error() {
            tracing::error!(error = %self.1.error, message = %self.1.message, "request failed");
        }
        (self.0, Json(self.1)).into_response()
    }
}

impl From<RecordsError> for Failure {
    fn from(e: RecordsError) -> Self {
        let msg = e.to_string();
        match e {
            RecordsError::UnknownPatient(_) => Failure::new(StatusCode::NOT_FOUND, "unknown_patient", msg),
            RecordsError::InvariantViolation(_) => {
                Failure::new(StatusCode::UNPROCESSABLE_ENTITY, "invariant_violation", msg)
            }
            RecordsError::NegativeAge { .. } => Failure::new(StatusCode::UNPROCESSABLE_ENTITY, "negative_age", msg),
            RecordsError::Io { .. } | RecordsError::Corrupt { .. } => {
                Failure::new(StatusCode::INTERNAL_SERVER_ERROR, "io_failure", msg)
            }
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        let msg = e.to_string();
        match e {
            CatalogError::NotFound(_) => Failure::new(StatusCode::NOT_FOUND, "unknown_dataset", msg),
            _ => Failure::new(StatusCode::INTERNAL_SERVER_ERROR, "catalog_failure", msg),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

/// Routes of the HTTP API.
pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/standards", get(list_standards))
        .route("/api/standards/{id}", get(get_standard))
        .route("/api/patients", get(list_patients).post(create_patient))
        .route("/api/patients/{pid}", get(get_patient))
        .route("/api/patients/{pid}/visits", get(list_visits).post(add_visit))
        .route("/api/patients/{pid}/chart/{indicator}", get(chart))
        .route("/api/patients/{pid}/recommendation", get(recommendation))
        .fallback(|| async { Failure::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

/// Serves the API on `listener` until the process stops.
pub async fn serve(listener: TcpListener, state: AppState) -> io::Result<()> {
    axum::serve(listener, router(Arc::new(state))).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| Failure::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| Failure::new(StatusCode::BAD_REQUEST, "malformed_request", e.to_string()))
}

async fn list_standards(State(s): State<Shared>) -> Result<Response> {
    let list = blocking(move || Ok(s.catalog.list()?)).await?;
    Ok(Json(list).into_response())
}

fn request_digests(headers: &HeaderMap) -> Vec<String> {
    let mut out: Vec<String> = headers
        .get_all(DIGEST_HEADER)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .map(|v| v.trim().to_string())
        .collect();
    for v in headers
        .get_all(header::IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
    {
        out.extend(
            v.split(',')
                .map(|t| t.trim().trim_start_matches("W/").trim_matches('"').to_string()),
        );
    }
    out
}

async fn get_standard(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response> {
    let (csv, digest) = blocking(move || {
        let ds: Dataset = s.catalog.get(&id)?;
        Ok((ds.to_csv(), ds.digest().0))
    })
    .await?;
    let digest_value = HeaderValue::from_str(&digest).expect("hex digest is a valid header");
    let etag = HeaderValue::from_str(&format!("\"{digest}\"")).expect("quoted hex is a valid header");
    if request_digests(&headers).contains(&digest) {
        return Ok((
            StatusCode::NOT_MODIFIED,
            [(DIGEST_HEADER, digest_value), (header::ETAG.as_str(), etag)],
            Body::empty(),
        )
            .into_response());
    }
    Ok((
        StatusCode::OK,
        [
            (
                header::CONTENT_TYPE.as_str(),
                HeaderValue::from_static("text/csv; charset=utf-8"),
            ),
            (DIGEST_HEADER, digest_value),
            (header::ETAG.as_str(), etag),
        ],
        csv,
    )
        .into_response())
}

async fn list_patients(State(s): State<Shared>) -> Json<Vec<Patient>> {
    Json(s.records.list_patients())
}

async fn get_patient(State(s): State<Shared>, Path(pid): Path<String>) -> Result<Json<Patient>> {
    Ok(Json(s.records.get_patient(&pid)?))
}

async fn create_patient(State(s): State<Shared>, body: Bytes) -> Result<Json<Patient>> {
    let patient: Patient = parse_json(&body)?;
    let stored = blocking(move || Ok(s.records.create_patient(patient)?)).await?;
    Ok(Json(stored))
}

async fn list_visits(State(s): State<Shared>, Path(pid): Path<String>) -> Result<Json<Vec<Visit>>> {
    Ok(Json(s.records.list_visits(&pid)?))
}

async fn add_visit(State(s): State<Shared>, Path(pid): Path<String>, body: Bytes) -> Result<Json<Visit>> {
    let mut value: serde_json::Value = parse_json(&body)?;
    let obj = value.as_object_mut().ok_or_else(|| {
        Failure::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            "visit must be a JSON object",
        )
    })?;
    match obj.get("patient_id") {
        None => {
            obj.insert("patient_id".into(), serde_json::Value::String(pid.clone()));
        }
        Some(v) if v.as_str() == Some(pid.as_str()) => {}
        Some(v) => {
            return Err(Failure::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "patient_mismatch",
                format!("body patient_id {v} differs from path `{pid}`"),
            ))
        }
    }
    let visit: Visit = serde_json::from_value(value)
        .map_err(|e| Failure::new(StatusCode::BAD_REQUEST, "malformed_request", e.to_string()))?;
    let stored = blocking(move || Ok(s.records.add_visit(visit)?)).await?;
    Ok(Json(stored))
}

#[derive(Debug, Deserialize)]
struct ChartQuery {
    palette: Option<String>,
    dataset: Option<String>,
}

fn palette_named(name: &str) -> Result<Palette> {
    Palette::builtin_named(name).ok_or_else(|| {
        Failure::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown_palette",
            format!("unknown palette `{name}`, expected `who` or `passport`"),
        )
    })
}

/// Standard to chart `indicator` for `sex`: an exact sex match first, then a
/// sex-neutral table; ties go to the smallest id.
fn pick_standard(catalog: &Catalog, indicator: Indicator, sex: Sex, explicit: Option<&str>) -> Result<Dataset> {
    if let Some(id) = explicit {
        let ds: Dataset = catalog.get(id)?;
        if ds.meta().indicator != indicator {
            return Err(Failure::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "indicator_mismatch",
                format!("dataset `{id}` is {}, not {indicator}", ds.meta().indicator),
            ));
        }
        return Ok(ds);
    }
    let entries = catalog.list()?;
    let pick = [sex, Sex::Any].iter().find_map(|want| {
        entries
            .iter()
            .find(|e| e.meta.indicator == indicator && e.meta.sex == *want)
    });
    match pick {
        Some(e) => Ok(catalog.get(&e.meta.id)?),
        None => Err(Failure::new(
            StatusCode::NOT_FOUND,
            "no_standard",
            format!("no {indicator} standard for sex {sex}"),
        )),
    }
}

fn parse_indicator(text: &str) -> Result<Indicator> {
    match text.parse::<Indicator>() {
        Ok(i) if i != Indicator::Custom => Ok(i),
        _ => Err(Failure::new(
            StatusCode::NOT_FOUND,
            "unknown_indicator",
            format!("unknown indicator `{text}`"),
        )),
    }
}

fn wants_svg(headers: &HeaderMap) -> bool {
    headers
        .get_all(header::ACCEPT)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .any(|v| v.split(',').any(|t| t.trim().starts_with("image/svg+xml")))
}

async fn chart(
    State(s): State<Shared>,
    Path((pid, indicator)): Path<(String, String)>,
    Query(q): Query<ChartQuery>,
    headers: HeaderMap,
) -> Result<Response> {
    let indicator = parse_indicator(&indicator)?;
    let palette_name = q.palette.unwrap_or_else(|| s.default_palette.clone());
    let palette = palette_named(&palette_name)?;
    let body = blocking(move || chart_response(&s, &pid, indicator, &palette, q.dataset.as_deref())).await?;
    if wants_svg(&headers) {
        return Ok(([(header::CONTENT_TYPE, "image/svg+xml")], body.svg).into_response());
    }
    Ok(Json(body).into_response())
}

fn chart_response(
    s: &AppState,
    pid: &str,
    indicator: Indicator,
    palette: &Palette,
    dataset: Option<&str>,
) -> Result<ChartResponse> {
    let patient = s.records.get_patient(pid)?;
    let ds = pick_standard(&s.catalog, indicator, patient.sex, dataset)?;
    let obs = s.records.observations(pid, indicator, ds.meta().x_unit)?;
    let pairs: Vec<(f64, f64)> = obs.iter().map(|o| (o.x, o.y)).collect();
    let mut growth = growth_chart_spec(&ds, &pairs, palette)
        .map_err(|e| Failure::new(StatusCode::UNPROCESSABLE_ENTITY, "chart_failure", e.to_string()))?;
    growth.spec.title = format!("{} - {}", growth.spec.title, patient.name);
    let svg = render_svg(&growth.spec, &RenderOptions::default())
        .map_err(|e| Failure::new(StatusCode::INTERNAL_SERVER_ERROR, "render_failure", e.to_string()))?;

    let visits: HashMap<String, Visit> = s
        .records
        .list_visits(pid)?
        .into_iter()
        .map(|v| (v.id.clone(), v))
        .collect();
    let dropped_idx: Vec<usize> = growth.dropped.iter().map(|d| d.index).collect();
    let points = obs
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped_idx.contains(i))
        .filter_map(|(_, o)| {
            let r = zscore(&ds, o.x, o.y, palette).ok()?;
            let measures = visits.get(&o.visit_id).map(|v| v.measures.clone()).unwrap_or_default();
            let rutf = match (&s.rations, measures.get(WEIGHT_KG)) {
                (Some(t), Some(&w)) => rutf_rations(w, t).ok(),
                _ => None,
            };
            Some(ChartPoint {
                visit_id: o.visit_id.clone(),
                date: o.date,
                x: o.x,
                y: o.y,
                z: r.z,
                z_text: format_z(r.z),
                zone: r.zone,
                band: r.band.to_string(),
                legacy: legacy_symbol(r.z),
                measures,
                rutf_rations: rutf,
            })
        })
        .collect();
    Ok(ChartResponse {
        dataset: ds.id().to_string(),
        palette: palette.name().to_string(),
        spec: growth.spec,
        svg,
        points,
        dropped: growth.dropped,
    })
}

#[derive(Debug, Deserialize)]
struct RecommendationQuery {
    #[serde(default)]
    discharged: bool,
    dataset: Option<String>,
}

async fn recommendation(
    State(s): State<Shared>,
    Path(pid): Path<String>,
    Query(q): Query<RecommendationQuery>,
) -> Result<Json<RecommendationResponse>> {
    blocking(move || recommend_for(&s, &pid, q.discharged, q.dataset.as_deref()))
        .await
        .map(Json)
}

fn insufficient(message: impl Into<String>) -> Failure {
    Failure::new(StatusCode::UNPROCESSABLE_ENTITY, "insufficient_measures", message)
}

fn recommend_for(s: &AppState, pid: &str, discharged: bool, dataset: Option<&str>) -> Result<RecommendationResponse> {
    let patient = s.records.get_patient(pid)?;
    let visit = s
        .records
        .list_visits(pid)?
        .pop()
        .ok_or_else(|| insufficient("patient has no visits"))?;
    let ds = pick_standard(&s.catalog, Indicator::WeightForHeight, patient.sex, dataset)?;
    if ds.meta().x_unit != XUnit::LengthCm {
        return Err(insufficient(format!("dataset `{}` is not indexed by length", ds.id())));
    }
    let obs = s
        .records
        .observations(pid, Indicator::WeightForHeight, XUnit::LengthCm)?
        .into_iter()
        .find(|o| o.visit_id == visit.id)
        .ok_or_else(|| insufficient(format!("latest visit {} lacks weight or height", visit.id)))?;
    let muac = visit
        .measure(MUAC_CM)
        .ok_or_else(|| insufficient(format!("latest visit {} lacks MUAC", visit.id)))?;
    let oedema = match visit.measure(OEDEMA) {
        None => Oedema::None,
        Some(g) => Oedema::from_grade(g as u8).ok_or_else(|| insufficient(format!("bad oedema grade {g}")))?,
    };
    let z = z_value(&ds, obs.x, obs.y).map_err(|e| insufficient(e.to_string()))?;
    let inputs = NutritionInputs::new(z, muac, oedema, discharged).map_err(|e| insufficient(e.to_string()))?;
    let rec = recommend_program(&inputs);
    Ok(RecommendationResponse {
        program: rec.program,
        reasons: rec.reasons,
        advisory: rec.advisory,
        inputs: RecommendationInputs {
            visit_id: visit.id,
            date: visit.date,
            dataset: ds.id().to_string(),
            z_wfh: z,
            muac_cm: muac,
            oedema,
            recently_discharged_otp: discharged,
        },
    })
}
