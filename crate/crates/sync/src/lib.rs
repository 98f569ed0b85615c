//! HTTP service over the standards catalog and patient records, and the
//! offline-first client that synchronizes a local data directory with it.
//!
//! Standards are fetched conditionally: the client sends the digest it holds
//! in [`DIGEST_HEADER`] and the server answers `304 Not Modified` with an
//! empty body when nothing changed. Visits and patients recorded offline wait
//! in a queue and are pushed in order; the server stores them idempotently,
//! so a retried push never duplicates a record.

pub mod api;
pub mod client;
pub mod layout;
pub mod server;
pub mod state;

pub use client::{client_sync, sync_data_dir, SyncError, SyncOptions, SyncReport};
pub use layout::DataDir;
pub use server::{router, serve, AppState};
pub use state::{SyncLock, SyncState};

/// Request and response header carrying a dataset digest.
pub const DIGEST_HEADER: &str = "X-Dataset-Digest";
