//! Offline-first sync client.

use std::collections::HashMap;
use std::io;
use std::thread;
use std::time::Duration;

use chrono::Utc;
use medgraph_core::standards::{Catalog, CatalogEntry, CatalogError};
use medgraph_core::Dataset;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use ureq::Agent;

use crate::layout::DataDir;
use crate::state::{Rejected, SyncLock, SyncState};
use crate::DIGEST_HEADER;

#[derive(Debug, Clone)]
pub struct SyncOptions {
    /// Extra attempts after a transport failure or a 5xx/429 answer.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further one.
    pub backoff: Duration,
    /// Limit on a whole request, connect to last body byte.
    pub timeout: Duration,
}

impl Default for SyncOptions {
    fn default() -> Self {
        SyncOptions {
            retries: 4,
            backoff: Duration::from_millis(250),
            timeout: Duration::from_secs(15),
        }
    }
}

/// What one sync run did.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub pushed_patients: Vec<String>,
    pub pushed: Vec<String>,
    /// Datasets whose body was downloaded.
    pub pulled: Vec<String>,
    /// Datasets already current.
    pub unchanged: Vec<String>,
    /// Records the server refused in this run, as `kind/id`.
    pub rejected: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SyncError {
    #[error("server unreachable: {message}")]
    NetworkUnreachable { message: String, report: Box<SyncReport> },
    #[error("another sync is already running")]
    Busy,
    #[error("sync state: {0}")]
    State(#[from] io::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("protocol error: {0}")]
    Protocol(String),
}

struct Reply {
    status: u16,
    digest: Option<String>,
    body: String,
}

enum Outcome {
    Done(Reply),
    Unreachable(String),
}

struct Client<'a> {
    agent: Agent,
    base: String,
    opts: &'a SyncOptions,
}

impl<'a> Client<'a> {
    fn new(server: &str, opts: &'a SyncOptions) -> Self {
        let config = Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .http_status_as_error(false)
            .build();
        Client {
            agent: Agent::new_with_config(config),
            base: server.trim_end_matches('/').to_string(),
            opts,
        }
    }

    fn once(&self, method: &str, path: &str, digest: Option<&str>, body: Option<&str>) -> Result<Reply, ureq::Error> {
        let url = format!("{}{}", self.base, path);
        let mut resp = match (method, body) {
            ("POST", Some(b)) => self
                .agent
                .post(&url)
                .header("Content-Type", "application/json")
                .send(b)?,
            _ => {
                let mut req = self.agent.get(&url);
                if let Some(d) = digest {
                    req = req.header(DIGEST_HEADER, d);
                }
                req.call()?
            }
        };
        let status = resp.status().as_u16();
        let digest = resp
            .headers()
            .get(DIGEST_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = resp.body_mut().read_to_string()?;
        Ok(Reply { status, digest, body })
    }

    fn request(&self, method: &str, path: &str, digest: Option<&str>, body: Option<&str>) -> Outcome {
        let mut delay = self.opts.backoff;
        let mut last = String::new();
        for attempt in 0..=self.opts.retries {
            if attempt > 0 {
                thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
            match self.once(method, path, digest, body) {
                Ok(r) if r.status >= 500 || r.status == 429 => {
                    last = format!("{method} {path}: HTTP {}", r.status);
                }
                Ok(r) => return Outcome::Done(r),
                Err(e) => last = format!("{method} {path}: {e}"),
            }
            tracing::debug!(attempt, error = %last, "request failed");
        }
        Outcome::Unreachable(last)
    }
}

fn unreachable(message: String, report: SyncReport) -> SyncError {
    SyncError::NetworkUnreachable {
        message,
        report: Box::new(report),
    }
}

fn reason_of(body: &str) -> String {
    serde_json::from_str::<serde_json::Value>(body)
        .ok()
        .and_then(|v| v.get("message").and_then(|m| m.as_str()).map(str::to_string))
        .unwrap_or_else(|| body.to_string())
}

/// Pushes queued records in order, then pulls every dataset that changed on
/// the server. `state` is updated as each step completes, so it can be saved
/// after a failure and the next run resumes where this one stopped.
pub fn client_sync(
    state: &mut SyncState,
    server: &str,
    catalog: &Catalog,
    opts: &SyncOptions,
) -> Result<SyncReport, SyncError> {
    let client = Client::new(server, opts);
    let mut report = SyncReport::default();

    while let Some(p) = state.pending_patients.front() {
        let body = serde_json::to_string(p).expect("patient serializes");
        match client.request("POST", "/api/patients", None, Some(&body)) {
            Outcome::Unreachable(m) => return Err(unreachable(m, report)),
            Outcome::Done(r) if r.status == 200 => report.pushed_patients.push(p.id.clone()),
            Outcome::Done(r) => {
                report.rejected.push(format!("patient/{}", p.id));
                state.rejected.push(Rejected {
                    kind: "patient".into(),
                    id: p.id.clone(),
                    status: r.status,
                    reason: reason_of(&r.body),
                    record: serde_json::to_value(p).expect("patient serializes"),
                });
            }
        }
        state.pending_patients.pop_front();
    }

    while let Some(v) = state.pending_visits.front() {
        let body = serde_json::to_string(v).expect("visit serializes");
        let path = format!("/api/patients/{}/visits", v.patient_id);
        match client.request("POST", &path, None, Some(&body)) {
            Outcome::Unreachable(m) => return Err(unreachable(m, report)),
            Outcome::Done(r) if r.status == 200 => report.pushed.push(v.id.clone()),
            Outcome::Done(r) => {
                report.rejected.push(format!("visit/{}", v.id));
                state.rejected.push(Rejected {
                    kind: "visit".into(),
                    id: v.id.clone(),
                    status: r.status,
                    reason: reason_of(&r.body),
                    record: serde_json::to_value(v).expect("visit serializes"),
                });
            }
        }
        state.pending_visits.pop_front();
    }

    let remote: Vec<CatalogEntry> = match client.request("GET", "/api/standards", None, None) {
        Outcome::Unreachable(m) => return Err(unreachable(m, report)),
        Outcome::Done(r) if r.status == 200 => {
            serde_json::from_str(&r.body).map_err(|e| SyncError::Protocol(format!("standards list: {e}")))?
        }
        Outcome::Done(r) => return Err(SyncError::Protocol(format!("standards list: HTTP {}", r.status))),
    };
    let local: HashMap<String, String> = catalog.list()?.into_iter().map(|e| (e.meta.id, e.digest.0)).collect();

    for entry in remote {
        let id = entry.meta.id.clone();
        let held = local.get(&id);
        if held == Some(&entry.digest.0) {
            state.known_digests.insert(id.clone(), entry.digest.0);
            report.unchanged.push(id);
            continue;
        }
        let path = format!("/api/standards/{id}");
        let reply = match client.request("GET", &path, held.map(String::as_str), None) {
            Outcome::Unreachable(m) => return Err(unreachable(m, report)),
            Outcome::Done(r) => r,
        };
        match reply.status {
            304 => {
                if let Some(d) = held {
                    state.known_digests.insert(id.clone(), d.clone());
                }
                report.unchanged.push(id);
            }
            200 => {
                let ds = Dataset::parse(entry.meta.clone(), &reply.body)
                    .map_err(|e| SyncError::Protocol(format!("dataset `{id}`: {e}")))?;
                let digest = ds.digest().0;
                if reply.digest.as_deref().is_some_and(|d| d != digest) {
                    return Err(SyncError::Protocol(format!(
                        "dataset `{id}` digest mismatch: header {}, body {digest}",
                        reply.digest.unwrap_or_default()
                    )));
                }
                catalog.put(&ds)?;
                state.known_digests.insert(id.clone(), digest);
                report.pulled.push(id);
            }
            s => return Err(SyncError::Protocol(format!("dataset `{id}`: HTTP {s}"))),
        }
    }

    state.last_sync = Some(Utc::now());
    Ok(report)
}

/// Syncs a data directory under its lock, persisting the queue and digests
/// whether or not the run succeeds.
pub fn sync_data_dir(dir: &DataDir, server: &str, opts: &SyncOptions) -> Result<SyncReport, SyncError> {
    std::fs::create_dir_all(dir.root())?;
    let _lock = SyncLock::try_acquire(&dir.sync_lock())?.ok_or(SyncError::Busy)?;
    let catalog = Catalog::open(dir.standards())?;
    let mut state = SyncState::load(&dir.sync_state())?;
    let result = client_sync(&mut state, server, &catalog, opts);
    state.save(&dir.sync_state())?;
    result
}
