use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use sparql_assist::config::{EndpointConfig, ServiceConfig, CONFIG_ENV};
use sparql_assist::fetch::HttpFetcher;
use sparql_assist::loader::{ensure_from_graphs, Loader};
use sparql_assist::service::{self, preload};
use sparql_assist::wire::{respond_with_context, Defaults, SuggestRequest};
use sparql_assist_core::Registry;

#[derive(Debug, Parser)]
#[command(name = "sparql-assist", version, about = "Type-ahead completion for SPARQL queries")]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[command(flatten)]
        sources: SourceFlags,
    },
    /// Print suggestions for one cursor position as JSON.
    Suggest {
        file: PathBuf,
        /// Byte offset into the file.
        cursor: usize,
        #[arg(long)]
        limit: Option<usize>,
        /// Filter properties through the service registry.
        #[arg(long)]
        registry_filter: bool,
        #[command(flatten)]
        sources: SourceFlags,
    },
    /// Load the configured sources and print the term count and index dump.
    Index {
        #[command(flatten)]
        sources: SourceFlags,
    },
}

#[derive(Debug, Args)]
struct SourceFlags {
    /// Ontology file or URL to pre-load (repeatable).
    #[arg(long = "ontology")]
    ontologies: Vec<String>,
    /// SPARQL endpoint to harvest labels from (repeatable).
    #[arg(long = "endpoint")]
    endpoints: Vec<String>,
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Preferred label language, most preferred first (repeatable).
    #[arg(long = "lang")]
    langs: Vec<String>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Never touch the network; use cached copies only.
    #[arg(long)]
    offline: bool,
}

impl SourceFlags {
    fn apply(&self, config: &mut ServiceConfig) {
        config.ontologies.extend(self.ontologies.iter().cloned());
        config.endpoints.extend(self.endpoints.iter().map(|url| EndpointConfig {
            url: url.clone(),
            default_graph: None,
            page_size: 1000,
        }));
        if let Some(path) = &self.registry {
            config.registry_path = Some(path.clone());
        }
        if !self.langs.is_empty() {
            config.languages = self.langs.clone();
        }
        if let Some(dir) = &self.cache_dir {
            config.cache_dir = dir.clone();
        }
        if self.offline {
            config.fetch.allow_network = false;
        }
    }
}

enum Failure {
    Usage(String),
    Io(String),
}

fn load_config(path: Option<&PathBuf>) -> Result<ServiceConfig, Failure> {
    match path {
        Some(path) => ServiceConfig::from_file(path).map_err(|e| match e {
            sparql_assist::config::ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }),
        None => Ok(ServiceConfig::default()),
    }
}

fn load_registry(config: &ServiceConfig) -> Result<Option<Registry>, Failure> {
    let Some(path) = &config.registry_path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Registry::parse(&text)
        .map(Some)
        .map_err(|e| Failure::Usage(format!("invalid config field `registry_path`: {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Serve { port, sources } => {
            sources.apply(&mut config);
            if let Some(port) = port {
                config.listen_port = u64::from(port);
            }
            config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            runtime.block_on(async move {
                let state = service::startup(&config, Arc::new(HttpFetcher))
                    .await
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                let addr = std::net::SocketAddr::from(([127, 0, 0, 1], config.port()));
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| Failure::Io(format!("cannot listen on {addr}: {e}")))?;
                tracing::info!("listening on {addr}");
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                service::serve(listener, state, shutdown).await.map_err(|e| Failure::Io(e.to_string()))
            })
        }
        Command::Suggest {
            file,
            cursor,
            limit,
            registry_filter,
            sources,
        } => {
            sources.apply(&mut config);
            config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let query = std::fs::read_to_string(&file).map_err(|e| Failure::Io(format!("{}: {e}", file.display())))?;
            let registry = load_registry(&config)?;
            let loader = Loader::new(Arc::new(HttpFetcher), config.fetch_policy());
            let mut req = SuggestRequest::new(query, cursor);
            req.limit = limit;
            req.registry = Some(registry_filter);
            let defaults = Defaults::new(config.lang_pref(), config.limits.clone());
            req.validate(&defaults.limits).map_err(|e| Failure::Usage(e.to_string()))?;
            let (kb, _) = preload(&config, &loader);
            let ctx = req.context();
            let kb = ensure_from_graphs(&ctx, &kb, &loader, config.include_from_named);
            let response = respond_with_context(&req, &ctx, &kb, registry.as_ref(), &defaults);
            let json = serde_json::to_string_pretty(&response).map_err(|e| Failure::Io(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
        Command::Index { sources } => {
            sources.apply(&mut config);
            config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let loader = Loader::new(Arc::new(HttpFetcher), config.fetch_policy());
            let (kb, failures) = preload(&config, &loader);
            if config.ontologies.len() + config.endpoints.len() > 0 && failures.len() == config.ontologies.len() + config.endpoints.len() {
                return Err(Failure::Io(format!("no source could be loaded: {}", failures[0].reason)));
            }
            println!("terms\t{}", kb.index.terms().count());
            print!("{}", kb.index.dump());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Io(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
