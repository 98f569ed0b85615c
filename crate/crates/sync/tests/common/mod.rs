#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::thread;

use axum::Router;
use medgraph_core::standards::{Catalog, DatasetMeta, Indicator, Sex, XUnit};
use medgraph_core::Dataset;
use medgraph_sync::{router, AppState, DataDir};
use tokio::sync::oneshot;

pub const GIRLS: &str = include_str!("../../../core/tests/fixtures/wfl_girls_table1.csv");
pub const BOYS: &str = include_str!("../../../core/tests/fixtures/wfl_boys_table1.csv");
pub const RATIONS: &str = include_str!("../../../../data/rations.csv");

pub fn wfl(id: &str, sex: Sex, csv: &str) -> Dataset {
    Dataset::parse(
        DatasetMeta::new(id, Indicator::WeightForHeight, sex, XUnit::LengthCm),
        csv,
    )
    .unwrap()
}

/// Seeds a server data directory with both length tables and the sample
/// ration table.
pub fn seed_server_dir(root: &Path) -> DataDir {
    let dir = DataDir::new(root);
    let catalog = Catalog::open(dir.standards()).unwrap();
    catalog.put(&wfl("wfl-girls", Sex::Female, GIRLS)).unwrap();
    catalog.put(&wfl("wfl-boys", Sex::Male, BOYS)).unwrap();
    std::fs::write(dir.rations(), RATIONS).unwrap();
    dir
}

/// A server running on its own runtime thread; stops on drop.
pub struct TestServer {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    handle: Option<thread::JoinHandle<()>>,
}

impl TestServer {
    pub fn start(dir: &DataDir) -> Self {
        Self::start_with(dir, |r| r)
    }

    pub fn start_with(dir: &DataDir, wrap: impl FnOnce(Router) -> Router + Send + 'static) -> Self {
        let state = Arc::new(AppState::open(dir, "who").unwrap());
        let app = wrap(router(Arc::clone(&state)));
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (stop, stop_rx) = oneshot::channel::<()>();
        let handle = thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = stop_rx.await;
                    })
                    .await
                    .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        TestServer {
            addr,
            state,
            stop: Some(stop),
            handle: Some(handle),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub struct Reply {
    pub status: u16,
    pub content_type: String,
    pub digest: Option<String>,
    pub body: String,
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn finish(mut resp: ureq::http::Response<ureq::Body>) -> Reply {
    let header = |name: &str| {
        resp.headers()
            .get(name)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string)
    };
    let content_type = header("content-type").unwrap_or_default();
    let digest = header("x-dataset-digest");
    Reply {
        status: resp.status().as_u16(),
        content_type,
        digest,
        body: resp.body_mut().read_to_string().unwrap(),
    }
}

pub fn get(url: &str, headers: &[(&str, &str)]) -> Reply {
    let mut req = agent().get(url);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    finish(req.call().unwrap())
}

pub fn post(url: &str, body: &str) -> Reply {
    finish(
        agent()
            .post(url)
            .header("Content-Type", "application/json")
            .send(body)
            .unwrap(),
    )
}
pub mod scenarios;
