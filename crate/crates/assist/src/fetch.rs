//! Network access as an injectable capability.

use std::io::Read;
use std::time::Duration;

use ureq::ResponseExt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub url: String,
    pub accept: String,
    pub timeout: Duration,
    pub max_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResponse {
    /// URL after redirects.
    pub final_url: String,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("network disabled")]
    NetworkDisabled,
    #[error("timed out")]
    Timeout,
    #[error("response exceeds {0} bytes")]
    TooLarge(u64),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("too many redirects")]
    TooManyRedirects,
    #[error("{0}")]
    Transport(String),
}

/// Performs one HTTP GET. Implemented for closures so tests can inject
/// recorded responses.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, request: &FetchRequest) -> Result<FetchResponse, FetchError>;
}

impl<F> Fetcher for F
where
    F: Fn(&FetchRequest) -> Result<FetchResponse, FetchError> + Send + Sync,
{
    fn fetch(&self, request: &FetchRequest) -> Result<FetchResponse, FetchError> {
        self(request)
    }
}

pub const MAX_REDIRECTS: u32 = 5;

/// Blocking HTTP(S) client.
#[derive(Debug, Clone, Default)]
pub struct HttpFetcher;

impl Fetcher for HttpFetcher {
    fn fetch(&self, request: &FetchRequest) -> Result<FetchResponse, FetchError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(request.timeout))
            .max_redirects(MAX_REDIRECTS)
            .max_redirects_will_error(true)
            .http_status_as_error(false)
            .build()
            .into();
        let mut response = agent
            .get(&request.url)
            .header("Accept", &request.accept)
            .call()
            .map_err(map_error)?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(FetchError::Status(status));
        }
        let final_url = response.get_uri().to_string();
        let content_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let mut body = Vec::new();
        response
            .body_mut()
            .as_reader()
            .take(request.max_bytes + 1)
            .read_to_end(&mut body)
            .map_err(|e| FetchError::Transport(e.to_string()))?;
        if body.len() as u64 > request.max_bytes {
            return Err(FetchError::TooLarge(request.max_bytes));
        }
        Ok(FetchResponse {
            final_url,
            content_type,
            body,
        })
    }
}

fn map_error(e: ureq::Error) -> FetchError {
    match e {
        ureq::Error::Timeout(_) => FetchError::Timeout,
        ureq::Error::TooManyRedirects => FetchError::TooManyRedirects,
        ureq::Error::StatusCode(code) => FetchError::Status(code),
        other => FetchError::Transport(other.to_string()),
    }
}
