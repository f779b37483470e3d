use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use sumtrace_annotate::{router, AnnotationService};

/// Serve an annotation queue over HTTP.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Task queue written by `sumtrace audit init`.
    #[arg(long)]
    tasks: PathBuf,
    /// Directory of report documents (`*.json`).
    #[arg(long)]
    documents: PathBuf,
    /// Annotation log; created if missing.
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8787")]
    addr: String,
    /// Idle seconds before a lease lapses.
    #[arg(long, default_value_t = 900)]
    lease_secs: u64,
    /// Environment variable holding the shared token; unset disables the check.
    #[arg(long, default_value = "SUMTRACE_ANNOTATION_TOKEN")]
    token_env: String,
}

#[tokio::main]
async fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    let args = Args::parse();
    let service = match AnnotationService::load(&args.tasks, &args.documents, &args.store, Duration::from_secs(args.lease_secs)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    let token = std::env::var(&args.token_env).ok().filter(|t| !t.is_empty());
    let listener = match tokio::net::TcpListener::bind(&args.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", args.addr);
            return std::process::ExitCode::from(2);
        }
    };
    tracing::info!(addr = %args.addr, tasks = service.tasks().len(), "serving");
    let app = router(Arc::new(service), token);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(2)
        }
    }
}
