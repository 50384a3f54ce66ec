//! Shared helpers: a recording stub fetcher and fixture access.
#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod common;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use sparql_assist::fetch::{FetchError, FetchRequest, FetchResponse, Fetcher};
use sparql_assist::loader::{FetchPolicy, Loader};

pub use common::fixture;

/// Serves canned documents by URL and records every request.
#[derive(Default)]
pub struct StubFetcher {
    routes: Mutex<HashMap<String, (Option<String>, Vec<u8>)>>,
    requests: Mutex<Vec<String>>,
    delay: Option<Duration>,
}

impl StubFetcher {
    pub fn new() -> Arc<Self> {
        Arc::new(StubFetcher::default())
    }

    /// A fetcher that sleeps before answering every request.
    pub fn stalling(delay: Duration) -> Arc<Self> {
        Arc::new(StubFetcher {
            delay: Some(delay),
            ..StubFetcher::default()
        })
    }

    pub fn serve(&self, url: &str, content_type: Option<&str>, body: impl Into<Vec<u8>>) {
        self.routes
            .lock()
            .unwrap()
            .insert(url.to_string(), (content_type.map(str::to_string), body.into()));
    }

    pub fn serve_fixture(&self, url: &str, name: &str) {
        let body = std::fs::read(fixture(name)).unwrap();
        let ct = if name.ends_with(".nt") { "application/n-triples" } else { "text/turtle" };
        self.serve(url, Some(ct), body);
    }

    pub fn count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    pub fn count_for(&self, url: &str) -> usize {
        self.requests.lock().unwrap().iter().filter(|u| *u == url).count()
    }

    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

impl Fetcher for StubFetcher {
    fn fetch(&self, request: &FetchRequest) -> Result<FetchResponse, FetchError> {
        self.requests.lock().unwrap().push(request.url.clone());
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }
        let routes = self.routes.lock().unwrap();
        match routes.get(&request.url) {
            Some((ct, body)) => Ok(FetchResponse {
                final_url: request.url.clone(),
                content_type: ct.clone(),
                body: body.clone(),
            }),
            None => Err(FetchError::Status(404)),
        }
    }
}

pub fn policy(cache_dir: Option<&std::path::Path>, allow_network: bool) -> FetchPolicy {
    FetchPolicy {
        cache_dir: cache_dir.map(|p| p.to_path_buf()),
        allow_network,
        ..FetchPolicy::default()
    }
}

pub fn loader(stub: &Arc<StubFetcher>, cache_dir: Option<&std::path::Path>, allow_network: bool) -> Loader {
    Loader::new(stub.clone(), policy(cache_dir, allow_network))
}

/// A service bound to an ephemeral loopback port on its own runtime.
pub struct Running {
    pub addr: std::net::SocketAddr,
    pub state: Arc<sparql_assist::service::AppState>,
    runtime: Option<tokio::runtime::Runtime>,
}

impl Running {
    pub fn start(config: &sparql_assist::config::ServiceConfig, fetcher: Arc<dyn Fetcher>) -> Running {
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
        let (addr, state) = runtime.block_on(async {
            let state = sparql_assist::service::startup(config, fetcher).await.unwrap();
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            let addr = listener.local_addr().unwrap();
            tokio::spawn(sparql_assist::service::serve(listener, state.clone(), std::future::pending()));
            (addr, state)
        });
        Running {
            addr,
            state,
            runtime: Some(runtime),
        }
    }

    pub fn runtime(&self) -> &tokio::runtime::Runtime {
        self.runtime.as_ref().unwrap()
    }

    pub fn get(&self, path: &str) -> HttpReply {
        http(self.addr, "GET", path, None)
    }

    pub fn post(&self, path: &str, body: &[u8]) -> HttpReply {
        http(self.addr, "POST", path, Some(body))
    }

    pub fn post_json(&self, path: &str, body: &serde_json::Value) -> HttpReply {
        self.post(path, &serde_json::to_vec(body).unwrap())
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        // stalled loads must not hold the test process
        if let Some(rt) = self.runtime.take() {
            rt.shutdown_background();
        }
    }
}

#[derive(Debug)]
pub struct HttpReply {
    pub status: u16,
    pub headers: HashMap<String, String>,
    pub body: Vec<u8>,
}

impl HttpReply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(name).map(String::as_str)
    }
}

pub fn http(addr: std::net::SocketAddr, method: &str, path: &str, body: Option<&[u8]>) -> HttpReply {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let url = format!("http://{addr}{path}");
    let result = match (method, body) {
        ("GET", _) => agent.get(&url).call(),
        (_, body) => agent
            .post(&url)
            .header("content-type", "application/json")
            .send(body.unwrap_or_default()),
    };
    let mut response = result.unwrap();
    let headers = response
        .headers()
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), v.to_str().unwrap_or("").to_string()))
        .collect();
    let body = response.body_mut().read_to_vec().unwrap();
    HttpReply {
        status: response.status().as_u16(),
        headers,
        body,
    }
}
