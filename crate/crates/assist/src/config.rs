//! Service configuration, read from JSON.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sparql_assist_core::{Iri, LangPref};

use crate::endpoint::{EndpointSource, DEFAULT_ROW_CAP};
use crate::loader::FetchPolicy;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "SPARQL_ASSIST_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default)]
    pub default_graph: Option<String>,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_page_size() -> usize {
    1000
}

/// Durations are given in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FetchConfig {
    pub timeout: f64,
    pub max_bytes: u64,
    /// Overrides the top-level `cache_dir` when set.
    pub cache_dir: Option<PathBuf>,
    pub cache_ttl: f64,
    pub allow_network: bool,
}

impl Default for FetchConfig {
    fn default() -> Self {
        let policy = FetchPolicy::default();
        FetchConfig {
            timeout: policy.timeout.as_secs_f64(),
            max_bytes: policy.max_bytes,
            cache_dir: None,
            cache_ttl: policy.cache_ttl.as_secs_f64(),
            allow_network: policy.allow_network,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    pub max_query_bytes: usize,
    pub default_limit: usize,
    pub max_limit: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_query_bytes: 64 * 1024,
            default_limit: 20,
            max_limit: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub ontologies: Vec<String>,
    pub endpoints: Vec<EndpointConfig>,
    pub registry_path: Option<PathBuf>,
    pub languages: Vec<String>,
    pub cache_dir: PathBuf,
    /// Kept wide so out-of-range values get a field-specific message.
    pub listen_port: u64,
    pub fetch: FetchConfig,
    pub limits: Limits,
    /// Accept `POST /graphs` from non-loopback peers.
    pub allow_remote_admin: bool,
    /// Also load FROM NAMED graphs on the fly.
    pub include_from_named: bool,
    /// Time a request may wait for FROM-clause graphs.
    pub from_budget_ms: u64,
    pub row_cap: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ontologies: Vec::new(),
            endpoints: Vec::new(),
            registry_path: None,
            languages: vec!["en".to_string()],
            cache_dir: PathBuf::from(".sparql-assist-cache"),
            listen_port: 7878,
            fetch: FetchConfig::default(),
            limits: Limits::default(),
            allow_remote_admin: false,
            include_from_named: false,
            from_budget_ms: 2000,
            row_cap: DEFAULT_ROW_CAP,
        }
    }
}

fn seconds(field: &'static str, value: f64) -> Result<Duration, ConfigError> {
    Duration::try_from_secs_f64(value).map_err(|_| invalid(field, format!("{value} is not a valid duration")))
}

impl ServiceConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ServiceConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=65535).contains(&self.listen_port) {
            return Err(invalid("listen_port", format!("{} is not in 1..=65535", self.listen_port)));
        }
        if self.limits.default_limit == 0 {
            return Err(invalid("limits.default_limit", "must be positive"));
        }
        if self.limits.max_limit < self.limits.default_limit {
            return Err(invalid("limits.max_limit", "must be at least limits.default_limit"));
        }
        if self.limits.max_query_bytes == 0 {
            return Err(invalid("limits.max_query_bytes", "must be positive"));
        }
        if self.fetch.max_bytes == 0 {
            return Err(invalid("fetch.max_bytes", "must be positive"));
        }
        if seconds("fetch.timeout", self.fetch.timeout)?.is_zero() {
            return Err(invalid("fetch.timeout", "must be positive"));
        }
        seconds("fetch.cache_ttl", self.fetch.cache_ttl)?;
        for (i, endpoint) in self.endpoints.iter().enumerate() {
            if endpoint.page_size == 0 {
                return Err(invalid("endpoints.page_size", format!("endpoint {i}: must be at least 1")));
            }
            if url::Url::parse(&endpoint.url).is_err() {
                return Err(invalid("endpoints.url", format!("endpoint {i}: '{}' is not a URL", endpoint.url)));
            }
            if let Some(graph) = &endpoint.default_graph {
                if Iri::new(graph.clone()).is_err() {
                    return Err(invalid("endpoints.default_graph", format!("endpoint {i}: '{graph}' is not an IRI")));
                }
            }
        }
        if self.row_cap == 0 {
            return Err(invalid("row_cap", "must be positive"));
        }
        Ok(())
    }

    pub fn port(&self) -> u16 {
        self.listen_port as u16
    }

    pub fn lang_pref(&self) -> LangPref {
        LangPref::new(self.languages.iter())
    }

    pub fn fetch_policy(&self) -> FetchPolicy {
        FetchPolicy {
            timeout: Duration::from_secs_f64(self.fetch.timeout),
            max_bytes: self.fetch.max_bytes,
            cache_dir: Some(self.fetch.cache_dir.clone().unwrap_or_else(|| self.cache_dir.clone())),
            cache_ttl: Duration::from_secs_f64(self.fetch.cache_ttl),
            allow_network: self.fetch.allow_network,
        }
    }

    pub fn endpoint_sources(&self) -> Vec<EndpointSource> {
        self.endpoints
            .iter()
            .map(|e| EndpointSource {
                url: e.url.clone(),
                default_graph: e.default_graph.as_ref().and_then(|g| Iri::new(g.clone()).ok()),
                page_size: e.page_size,
            })
            .collect()
    }

    pub fn from_budget(&self) -> Duration {
        Duration::from_millis(self.from_budget_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ServiceConfig::from_json("{}").unwrap(), ServiceConfig::default());
    }

    #[test]
    fn errors_name_the_field() {
        let err = ServiceConfig::from_json(r#"{"listen_port": 0}"#).unwrap_err();
        assert!(err.to_string().contains("listen_port"), "{err}");
        let err = ServiceConfig::from_json(r#"{"limits": {"default_limit": 50, "max_limit": 10}}"#).unwrap_err();
        assert!(err.to_string().contains("limits.max_limit"), "{err}");
        let err = ServiceConfig::from_json(r#"{"endpoints": [{"url": "http://x/sparql", "page_size": 0}]}"#).unwrap_err();
        assert!(err.to_string().contains("page_size"), "{err}");
        let err = ServiceConfig::from_json(r#"{"ontology": []}"#).unwrap_err();
        assert!(err.to_string().contains("ontology"), "{err}");
    }

    #[test]
    fn policy_uses_top_level_cache_dir() {
        let config = ServiceConfig::from_json(r#"{"cache_dir": "/tmp/c", "fetch": {"timeout": 1.5}}"#).unwrap();
        let policy = config.fetch_policy();
        assert_eq!(policy.cache_dir, Some(PathBuf::from("/tmp/c")));
        assert_eq!(policy.timeout, Duration::from_millis(1500));
    }
}
