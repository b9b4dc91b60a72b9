//! HTTP service for labeling, triage and evaluation runs.
//!
//! State lives in append-only event logs under one data directory and is
//! rebuilt from them on startup. See [`store`] for the write path and
//! [`api`] for the routes.

pub mod api;
pub mod error;
pub mod eventlog;
pub mod runs;
pub mod store;
pub mod triage;

pub use api::{router, AppState};
pub use error::ServiceError;
pub use runs::EvalRunRecord;
pub use store::Store;

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, data_dir = %state.store().dir().display(), "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
