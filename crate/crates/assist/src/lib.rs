//! Service layer for SPARQL completion: graph loading, caching, endpoint
//! harvesting, configuration and the HTTP JSON protocol.

pub mod cache;
pub mod config;
pub mod endpoint;
pub mod fetch;
pub mod loader;
pub mod service;
pub mod wire;
