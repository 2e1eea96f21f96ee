//! HTTP/JSON service over the ruleforge miners and consultation engine.
//!
//! | Method | Path | Body |
//! |---|---|---|
//! | POST | `/datasets` | clausal dataset text |
//! | POST | `/datasets/{id}/mine` | `{kind: tree\|assoc, min_support?, min_confidence?, strategy?, empty_branch?}` |
//! | GET | `/artifacts/{kind}/{id}` | |
//! | POST | `/kbs` | `.knb` text |
//! | POST | `/sessions` | `{kb}` |
//! | POST | `/sessions/{id}/answer` | `{value}` (`"exit"` aborts) |
//! | GET | `/sessions/{id}/explanation` | |

pub mod api;
pub mod sessions;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;

pub use api::{router, AppState};
pub use sessions::SessionStore;
pub use store::{ArtifactKind, ArtifactStore};

pub const DEFAULT_HOST: &str = "127.0.0.1";
pub const DEFAULT_PORT: u16 = 7777;
pub const DATA_DIR_ENV: &str = "RULEFORGE_DATA_DIR";

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
}

pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let store = ArtifactStore::open(&config.data_dir)?;
    let app = router(AppState::new(store, SessionStore::default()));
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    let addr: SocketAddr = listener.local_addr()?;
    log::info!("listening on http://{addr}, storing artifacts in {}", config.data_dir.display());
    axum::serve(listener, app).await
}
