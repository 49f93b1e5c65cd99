use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use reekit_core::ingest::{DatasetSummary, ImportReport};
use reekit_core::lambda::{
    anomaly_factors_with, build_basis, fit_dataset, fit_lambdas, reconstruct, write_lambda_csv, AnomalyReport,
    DatasetFit, FitConfig, FitMetadata, LambdaSet, SampleError,
};
use reekit_core::metrics::{metric_report, write_metrics_csv, MetricConfig, MetricReport};
use reekit_core::viz::{build_payload, VizKind, VizPayload};
use reekit_core::{
    canonical_radii, normalize_with, Dataset, DomainError, Element, NonPositivePolicy, NormalizedPattern, ReePattern,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::params::{self, FitQuery, Format, OutputQuery, UploadQuery, VizQuery};
use crate::AppState;

type Shared = State<Arc<AppState>>;

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request("InvalidOption", e.body_text()))
}

fn body<T>(b: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    b.map(|Json(v)| v).map_err(|e| ApiError::new(e.status(), "InvalidBody", e.body_text()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        tracing::error!(error = %e, "worker task failed");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", "worker task failed")
    })
}

async fn load(state: &Arc<AppState>, id: &str) -> Result<Arc<Dataset>, ApiError> {
    let (state, id) = (state.clone(), id.to_string());
    Ok(blocking(move || state.store.get(&id)).await??)
}

/// Dataset plus its fit under `config`, computed once per settings.
async fn fitted(
    state: &Arc<AppState>,
    id: &str,
    config: &FitConfig,
) -> Result<(Arc<Dataset>, Arc<DatasetFit>), ApiError> {
    let ds = load(state, id).await?;
    let key = format!("{id}|{}", config.cache_key());
    if let Some(fit) = state.cached_fit(&key) {
        return Ok((ds, fit));
    }
    let (ds2, cfg) = (ds.clone(), config.clone());
    let fit = Arc::new(blocking(move || fit_dataset(&ds2, &cfg)).await??);
    Ok((ds, state.cache_fit(key, fit)))
}

fn csv_response(text: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response()
}

pub async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UploadResponse {
    pub dataset_id: String,
    pub import_report: ImportReport,
}

pub async fn upload_dataset(
    State(state): Shared,
    q: Result<Query<UploadQuery>, QueryRejection>,
    bytes: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<UploadResponse>), ApiError> {
    let options = query(q)?.options()?;
    let bytes = bytes.map_err(|e| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::new(
                e.status(),
                "PayloadTooLarge",
                format!("uploads are limited to {} bytes", crate::MAX_UPLOAD_BYTES),
            )
        } else {
            ApiError::new(e.status(), "InvalidBody", e.body_text())
        }
    })?;
    let (ds, report) = blocking(move || state.store.import(&bytes, &options)).await??;
    Ok((StatusCode::CREATED, Json(UploadResponse { dataset_id: ds.dataset_id.clone(), import_report: report })))
}

pub async fn list_datasets(State(state): Shared) -> Result<Json<Vec<DatasetSummary>>, ApiError> {
    Ok(Json(blocking(move || state.store.list()).await??))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetDetail {
    pub summary: DatasetSummary,
    pub category_schema: Vec<String>,
    pub sample_ids: Vec<String>,
    pub import_report: Option<ImportReport>,
}

pub async fn get_dataset(State(state): Shared, Path(id): Path<String>) -> Result<Json<DatasetDetail>, ApiError> {
    let ds = load(&state, &id).await?;
    let (manifest, report) = blocking(move || {
        Ok::<_, reekit_core::StoreError>((state.store.manifest(&id)?, state.store.import_report(&id)?))
    })
    .await??;
    Ok(Json(DatasetDetail {
        summary: DatasetSummary::from(&manifest),
        category_schema: ds.category_schema.clone(),
        sample_ids: ds.patterns.iter().map(|p| p.sample_id.clone()).collect(),
        import_report: report,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaResponse {
    pub dataset_id: String,
    pub metadata: FitMetadata,
    pub basis_id: String,
    pub lambdas: Vec<LambdaSet>,
    pub anomalies: Vec<AnomalyReport>,
    pub errors: Vec<SampleError>,
}

pub async fn get_lambdas(
    State(state): Shared,
    Path(id): Path<String>,
    q: Result<Query<OutputQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let q = query(q)?;
    let format = q.format()?;
    let config = q.fit.config()?;
    let (_, fit) = fitted(&state, &id, &config).await?;
    if format == Format::Csv {
        return Ok(csv_response(write_lambda_csv(&fit, config.degree_count)));
    }
    let basis = build_basis(&config.radii, config.degree_count)?;
    Ok(Json(LambdaResponse {
        dataset_id: id,
        metadata: config.metadata(),
        basis_id: basis.id().to_string(),
        lambdas: fit.lambdas.clone(),
        anomalies: fit.anomalies.clone(),
        errors: fit.errors.clone(),
    })
    .into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub dataset_id: String,
    pub standard: String,
    pub oxide_basis: String,
    pub reports: Vec<MetricReport>,
}

pub async fn get_metrics(
    State(state): Shared,
    Path(id): Path<String>,
    q: Result<Query<OutputQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let q = query(q)?;
    let format = q.format()?;
    let config = MetricConfig::new(params::standard(q.fit.standard.as_deref())?);
    let ds = load(&state, &id).await?;
    let reports: Vec<MetricReport> = ds.patterns.iter().map(|p| metric_report(p, &config, None)).collect();
    if format == Format::Csv {
        return Ok(csv_response(write_metrics_csv(&reports, &config)));
    }
    Ok(Json(MetricsResponse {
        dataset_id: id,
        standard: config.standard.name.clone(),
        oxide_basis: config.oxides.label(),
        reports,
    })
    .into_response())
}

pub async fn get_viz(
    State(state): Shared,
    Path((id, kind)): Path<(String, String)>,
    q: Result<Query<VizQuery>, QueryRejection>,
) -> Result<Json<VizPayload>, ApiError> {
    let kind: VizKind = kind.parse()?;
    let q = query(q)?;
    let config = q.fit.config()?;
    let request = q.request(kind, config.degree_count)?;
    let (ds, fit) = fitted(&state, &id, &config).await?;
    let payload = blocking(move || build_payload(kind, &ds, &fit, &config.standard, &config.radii, &request)).await??;
    Ok(Json(payload))
}

/// Everything the sandbox needs to open one sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleBundle {
    pub dataset_id: String,
    pub pattern: ReePattern,
    pub lambdas: Option<LambdaSet>,
    pub anomalies: Option<AnomalyReport>,
    pub metrics: MetricReport,
    pub fit_error: Option<SampleError>,
    pub metadata: FitMetadata,
}

pub async fn get_sample(
    State(state): Shared,
    Path((id, sample_id)): Path<(String, String)>,
    q: Result<Query<FitQuery>, QueryRejection>,
) -> Result<Json<SampleBundle>, ApiError> {
    let config = query(q)?.config()?;
    let (ds, fit) = fitted(&state, &id, &config).await?;
    let pattern = ds
        .pattern(&sample_id)
        .ok_or_else(|| ApiError::not_found(format!("sample '{sample_id}' not in dataset '{id}'")))?
        .clone();
    let (lambdas, anomalies) = match fit.get(&sample_id) {
        Some((l, a)) => (Some(l.clone()), Some(a.clone())),
        None => (None, None),
    };
    let fit_error = fit.errors.iter().find(|e| e.sample_id == sample_id).cloned();
    let metrics = metric_report(&pattern, &MetricConfig::new(config.standard.clone()), None);
    Ok(Json(SampleBundle {
        dataset_id: id,
        pattern,
        lambdas,
        anomalies,
        metrics,
        fit_error,
        metadata: config.metadata(),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardRequest {
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub standard: Option<String>,
    /// Defaults to the fourteen lanthanides.
    #[serde(default)]
    pub elements: Option<Vec<Element>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardPoint {
    pub element: Element,
    pub radius_pm: f64,
    pub y: f64,
    pub concentration_ppm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardResponse {
    pub standard: String,
    pub basis_id: String,
    pub points: Vec<ForwardPoint>,
}

pub async fn sandbox_forward(
    b: Result<Json<ForwardRequest>, JsonRejection>,
) -> Result<Json<ForwardResponse>, ApiError> {
    let req = body(b)?;
    params::check_degree(req.lambdas.len())?;
    if let Some(bad) = req.lambdas.iter().find(|l| !l.is_finite()) {
        return Err(ApiError::bad_request("InvalidOption", format!("lambda value {bad} is not finite")));
    }
    let standard = params::standard(req.standard.as_deref())?;
    let radii = canonical_radii();
    let basis = build_basis(&radii, req.lambdas.len())?;
    let elements: BTreeSet<Element> = match req.elements {
        Some(list) => list.into_iter().filter(|e| e.is_canonical()).collect(),
        None => Element::CANONICAL.into_iter().collect(),
    };
    let rec = reconstruct(&req.lambdas, &basis, &elements, &standard)?;
    let points = rec
        .into_iter()
        .map(|(element, p)| ForwardPoint {
            element,
            radius_pm: p.radius_pm,
            y: p.y,
            concentration_ppm: p.concentration_ppm,
        })
        .collect();
    Ok(Json(ForwardResponse { standard: standard.name, basis_id: basis.id().to_string(), points }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseRequest {
    pub concentrations: BTreeMap<Element, f64>,
    #[serde(default)]
    pub standard: Option<String>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub exclude: Option<Vec<Element>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseResponse {
    pub lambdas: LambdaSet,
    pub normalized: NormalizedPattern,
    pub anomalies: Option<AnomalyReport>,
    pub metadata: FitMetadata,
}

pub async fn sandbox_inverse(
    b: Result<Json<InverseRequest>, JsonRejection>,
) -> Result<Json<InverseResponse>, ApiError> {
    let req = body(b)?;
    let degree = req.degree.unwrap_or(reekit_core::lambda::DEFAULT_DEGREE_COUNT);
    params::check_degree(degree)?;
    for (&element, &value) in &req.concentrations {
        if !value.is_finite() || value < 0.0 {
            return Err(DomainError::InvalidConcentration { sample_id: "sandbox".into(), element, value }.into());
        }
    }
    let config = FitConfig {
        standard: params::standard(req.standard.as_deref())?,
        exclusions: req.exclude.unwrap_or_default().into_iter().collect(),
        degree_count: degree,
        ..FitConfig::default()
    };
    // the sandbox may hold fewer elements than an imported sample; the fit
    // itself reports when there are too few to resolve the degree
    let pattern = ReePattern {
        sample_id: "sandbox".to_string(),
        concentrations_ppm: req.concentrations,
        categories: BTreeMap::new(),
        uncertainties_ppm: None,
    };
    let basis = build_basis(&config.radii, degree)?;
    let np =
        normalize_with(&pattern, &config.standard, &config.radii, &config.exclusions, NonPositivePolicy::Reject, 0)
            .map_err(reekit_core::FitError::from)?;
    let lambdas = fit_lambdas(&np, &basis, None)?;
    let anomalies = anomaly_factors_with(
        &pattern,
        &config.standard,
        &config.radii,
        &basis,
        &config.exclusions,
        NonPositivePolicy::Reject,
        None,
    )
    .ok()
    .filter(|a| !a.factors.is_empty());
    Ok(Json(InverseResponse { lambdas, normalized: np, anomalies, metadata: config.metadata() }))
}
