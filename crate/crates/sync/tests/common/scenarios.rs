//! Sync scenarios against instrumented servers, shared with the acceptance
//! suite.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::Request;
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use chrono::NaiveDate;
use medgraph_core::records::{Patient, Visit, WEIGHT_KG};
use medgraph_core::standards::{Catalog, Sex};
use medgraph_sync::{sync_data_dir, DataDir, SyncError, SyncOptions, SyncReport, SyncState};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{seed_server_dir, wfl, TestServer, GIRLS};

pub fn fast_options() -> SyncOptions {
    SyncOptions {
        retries: 6,
        backoff: Duration::from_millis(1),
        timeout: Duration::from_secs(5),
    }
}

/// Girls table with the 47.0 cm median nudged up.
pub fn revised_girls() -> String {
    GIRLS.replace("47.0,2.2,2.4,2.6,2.8", "47.0,2.2,2.4,2.6,2.9")
}

pub struct Economy {
    /// Dataset bodies served, by dataset id.
    pub bodies: HashMap<String, usize>,
    pub reports: Vec<SyncReport>,
    pub client_state: SyncState,
    pub client_catalog: Catalog,
    _tmp: tempfile::TempDir,
}

/// Three syncs against a server that counts the dataset bodies it sends,
/// with the girls table revised between the second and third.
pub fn three_syncs_one_change() -> Economy {
    let tmp = tempfile::tempdir().unwrap();
    let server_dir = seed_server_dir(&tmp.path().join("server"));
    let client_dir = DataDir::new(tmp.path().join("client"));
    let bodies: Arc<Mutex<HashMap<String, usize>>> = Arc::default();

    let counter = Arc::clone(&bodies);
    let srv = TestServer::start_with(&server_dir, move |r| {
        r.layer(middleware::from_fn(move |req: Request, next: Next| {
            let counter = Arc::clone(&counter);
            async move {
                let path = req.uri().path().to_string();
                let resp = next.run(req).await;
                if let Some(id) = path.strip_prefix("/api/standards/") {
                    if resp.status() == StatusCode::OK {
                        *counter.lock().unwrap().entry(id.to_string()).or_default() += 1;
                    }
                }
                resp
            }
        }))
    });

    let opts = fast_options();
    let mut reports = vec![
        sync_data_dir(&client_dir, &srv.url(), &opts).unwrap(),
        sync_data_dir(&client_dir, &srv.url(), &opts).unwrap(),
    ];
    srv.state
        .catalog
        .put(&wfl("wfl-girls", Sex::Female, &revised_girls()))
        .unwrap();
    reports.push(sync_data_dir(&client_dir, &srv.url(), &opts).unwrap());
    drop(srv);

    let bodies = bodies.lock().unwrap().clone();
    Economy {
        bodies,
        reports,
        client_state: SyncState::load(&client_dir.sync_state()).unwrap(),
        client_catalog: Catalog::open(client_dir.standards()).unwrap(),
        _tmp: tmp,
    }
}

pub struct Drain {
    pub runs: usize,
    pub failed_runs: usize,
    /// Requests the server failed on purpose.
    pub injected: usize,
    /// Visit ids acknowledged to the client, over all runs, in order.
    pub acknowledged: Vec<String>,
    /// Visit ids stored by the server.
    pub stored: Vec<String>,
    /// Lines in the server's visit log.
    pub log_lines: usize,
    pub final_state: SyncState,
    pub queued: Vec<String>,
}

/// Queues a patient and five visits offline, then syncs through a server
/// that fails half of all requests, either before or after handling them,
/// until the queue is empty.
pub fn drain_under_failures(seed: u64) -> Drain {
    let tmp = tempfile::tempdir().unwrap();
    let server_dir = seed_server_dir(&tmp.path().join("server"));
    let client_dir = DataDir::new(tmp.path().join("client"));
    std::fs::create_dir_all(client_dir.root()).unwrap();

    let birth = NaiveDate::from_ymd_opt(2024, 1, 10).unwrap();
    let mut state = SyncState::default();
    state.enqueue_patient(Patient {
        id: "child-1".into(),
        name: "Offline child".into(),
        sex: Sex::Female,
        birth_date: birth,
    });
    let queued: Vec<String> = (1..=5).map(|i| format!("visit-{i}")).collect();
    for (i, id) in queued.iter().enumerate() {
        state.enqueue_visit(Visit {
            id: id.clone(),
            patient_id: "child-1".into(),
            date: birth + chrono::Duration::days(7 * (i as i64 + 1)),
            measures: [(WEIGHT_KG.to_string(), 3.0 + 0.1 * i as f64)].into(),
            note: None,
        });
    }
    state.save(&client_dir.sync_state()).unwrap();

    let rng = Arc::new(Mutex::new(StdRng::seed_from_u64(seed)));
    let injected = Arc::new(AtomicUsize::new(0));
    let (rng2, injected2) = (Arc::clone(&rng), Arc::clone(&injected));
    let srv = TestServer::start_with(&server_dir, move |r| {
        r.layer(middleware::from_fn(move |req: Request, next: Next| {
            let (rng, injected) = (Arc::clone(&rng2), Arc::clone(&injected2));
            async move {
                let roll: f64 = rng.lock().unwrap().gen();
                if roll < 0.25 {
                    injected.fetch_add(1, Ordering::SeqCst);
                    return (StatusCode::SERVICE_UNAVAILABLE, "injected failure").into_response();
                }
                let resp: Response = next.run(req).await;
                if roll < 0.5 {
                    injected.fetch_add(1, Ordering::SeqCst);
                    return (StatusCode::BAD_GATEWAY, "injected failure after handling").into_response();
                }
                resp
            }
        }))
    });

    let mut opts = fast_options();
    opts.retries = 2;
    let (mut runs, mut failed_runs, mut acknowledged) = (0, 0, Vec::new());
    loop {
        runs += 1;
        assert!(runs <= 200, "queue never drained");
        match sync_data_dir(&client_dir, &srv.url(), &opts) {
            Ok(report) => {
                acknowledged.extend(report.pushed);
                break;
            }
            Err(SyncError::NetworkUnreachable { report, .. }) => {
                failed_runs += 1;
                acknowledged.extend(report.pushed);
            }
            Err(e) => panic!("unexpected sync error: {e}"),
        }
    }
    let stored = srv
        .state
        .records
        .list_visits("child-1")
        .unwrap()
        .into_iter()
        .map(|v| v.id)
        .collect();
    drop(srv);
    let log_lines = std::fs::read_to_string(server_dir.records().join("visits.jsonl"))
        .unwrap()
        .lines()
        .count();
    Drain {
        runs,
        failed_runs,
        injected: injected.load(Ordering::SeqCst),
        acknowledged,
        stored,
        log_lines,
        final_state: SyncState::load(&client_dir.sync_state()).unwrap(),
        queued,
    }
}
