#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use sumtrace_cli::config::load_config;
use sumtrace_cli::summarize::{summarize, Matrix};
use sumtrace_cli::{ingest, Workdir};
use sumtrace_gateway::{Gateway, ImportProvider, Mode};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn config() -> PathBuf {
    fixtures().join("config.toml")
}

pub fn updating() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

pub fn sumtrace(work: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumtrace"))
        .arg("--work")
        .arg(work)
        .args(args)
        .env_remove("ANTHROPIC_API_KEY")
        .env_remove("OPENAI_API_KEY")
        .output()
        .expect("run sumtrace")
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Re-records the fixture cassettes from the imported summary texts, served
/// under the real provider ids. Only runs with UPDATE_GOLDEN set.
pub fn record_cassettes() {
    static DONE: OnceLock<()> = OnceLock::new();
    if !updating() {
        return;
    }
    DONE.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let work = Workdir::new(tmp.path());
        let (gateway_config, run) = load_config(&config()).unwrap();
        ingest::ingest(&fixtures().join("corpus"), &work, &run.seeds).unwrap();
        let import = || Box::new(ImportProvider { dir: fixtures().join("summaries") });
        let gateway = Gateway::new(gateway_config)
            .unwrap()
            .with_provider("anthropic", import())
            .with_provider("openai", import());
        let matrix = Matrix {
            models: run.models,
            prompts: run.prompts,
            seeds: run.seeds,
        };
        let (_, outcome) = summarize(&work, &gateway, &matrix, Mode::Record).unwrap();
        assert_eq!(outcome.failures, 0);
    });
}

/// ingest → summarize (replay) → analyze → audit init in `work`.
pub fn pipeline(work: &Path) {
    record_cassettes();
    let config = config();
    let config = config.to_str().unwrap();
    let corpus = fixtures().join("corpus");
    ok(&sumtrace(work, &["--config", config, "ingest", corpus.to_str().unwrap()]));
    ok(&sumtrace(work, &["--config", config, "--mode", "replay", "summarize"]));
    ok(&sumtrace(work, &["analyze"]));
    ok(&sumtrace(work, &["audit", "init"]));
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    sumtrace_cli::workdir::list_files(dir)
        .unwrap()
        .into_iter()
        .map(|f| {
            let bytes = std::fs::read(dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect()
}
