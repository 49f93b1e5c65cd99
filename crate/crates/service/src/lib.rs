//! HTTP API over the reekit library.
//!
//! Every route is served under `/v1` and, for convenience, at the root.
//! Fits are computed on demand and cached per dataset and fit settings.

mod error;
mod handlers;
mod params;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use reekit_core::ingest::DatasetStore;
use reekit_core::lambda::DatasetFit;
use reekit_core::StoreError;

pub use error::ApiError;
pub use handlers::{
    DatasetDetail, ForwardPoint, ForwardRequest, ForwardResponse, InverseRequest, InverseResponse, LambdaResponse,
    MetricsResponse, SampleBundle, UploadResponse,
};

/// Largest accepted upload.
pub const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug)]
pub struct AppState {
    pub store: DatasetStore,
    fits: RwLock<HashMap<String, Arc<DatasetFit>>>,
}

impl AppState {
    pub fn new(store: DatasetStore) -> Self {
        Self { store, fits: RwLock::new(HashMap::new()) }
    }

    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        Ok(Self::new(DatasetStore::open(data_dir)?))
    }

    fn cached_fit(&self, key: &str) -> Option<Arc<DatasetFit>> {
        self.fits.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    fn cache_fit(&self, key: String, fit: Arc<DatasetFit>) -> Arc<DatasetFit> {
        let mut fits = self.fits.write().unwrap_or_else(|e| e.into_inner());
        fits.entry(key).or_insert(fit).clone()
    }
}

fn api_routes() -> Router<Arc<AppState>> {
    Router::new()
        .route("/health", get(handlers::health))
        .route("/datasets", get(handlers::list_datasets).post(handlers::upload_dataset))
        .route("/datasets/{id}", get(handlers::get_dataset))
        .route("/datasets/{id}/lambdas", get(handlers::get_lambdas))
        .route("/datasets/{id}/metrics", get(handlers::get_metrics))
        .route("/datasets/{id}/viz/{kind}", get(handlers::get_viz))
        .route("/datasets/{id}/sample/{sample_id}", get(handlers::get_sample))
        .route("/sandbox/forward", post(handlers::sandbox_forward))
        .route("/sandbox/inverse", post(handlers::sandbox_inverse))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .nest("/v1", api_routes())
        .merge(api_routes())
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

/// Serves the API on `addr` until Ctrl-C.
pub async fn serve(addr: SocketAddr, data_dir: PathBuf) -> std::io::Result<()> {
    let state = AppState::open(&data_dir).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, data_dir = %data_dir.display(), "listening");
    serve_listener(listener, Arc::new(state), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_listener(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
