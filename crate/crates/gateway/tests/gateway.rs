use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use sumtrace_core::corpus::{Document, ParagraphBody};
use sumtrace_gateway::{
    Cassette, CassetteStore, Completion, CompletionRequest, Gateway, GatewayConfig, GatewayError, HttpProvider,
    Mode, PromptKind, Provider, ProviderConfig, ProviderKind, Throttle, EMPTY_RESPONSE_MARKER,
};

struct Received {
    headers: Vec<(String, String)>,
    body: Value,
}

/// Serves the scripted responses in order, one connection each.
fn mock_server(script: Vec<(u16, Vec<(&'static str, String)>, String)>) -> (String, Arc<Mutex<Vec<Received>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for (status, extra, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut headers = Vec::new();
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                line.clear();
                reader.read_line(&mut line).unwrap();
                let l = line.trim_end();
                if l.is_empty() {
                    break;
                }
                let (k, v) = l.split_once(':').unwrap();
                headers.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
            }
            let len: usize = headers
                .iter()
                .find(|(k, _)| k == "content-length")
                .map_or(0, |(_, v)| v.parse().unwrap());
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Received {
                headers,
                body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
            });
            let mut out = format!("HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n", body.len());
            for (k, v) in extra {
                out.push_str(&format!("{k}: {v}\r\n"));
            }
            out.push_str("\r\n");
            out.push_str(&body);
            let mut stream = reader.into_inner();
            stream.write_all(out.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn provider_config(kind: ProviderKind, url: &str, env: &str, retries: u32) -> ProviderConfig {
    ProviderConfig {
        kind,
        base_url: Some(url.to_string()),
        api_key_env: Some(env.to_string()),
        dir: None,
        max_in_flight: 2,
        requests_per_minute: None,
        max_retries: retries,
        timeout_secs: 10,
    }
}

fn report(id: &str) -> Document {
    Document::new(
        id,
        vec![
            ParagraphBody::Prose {
                text: "Net sales increased 12% to $72.6 million in fiscal 2021.".into(),
            },
            ParagraphBody::Prose {
                text: "Operating cash flow improved on higher cash inflows for net working capital.".into(),
            },
        ],
    )
}

fn config(dir: &std::path::Path, budget: usize) -> GatewayConfig {
    GatewayConfig::from_toml(&format!(
        r#"
cassette_dir = "{}"

[providers.local]
kind = "import"
dir = "{}"

[[models]]
provider_id = "local"
model_name = "claude-2.1"
context_budget_tokens = {budget}
max_output_tokens = 16
temperature = 1.0
"#,
        dir.join("cassettes").display(),
        dir.join("import").display(),
    ))
    .unwrap()
}

fn seed_import(dir: &std::path::Path, name: &str, text: &str) {
    std::fs::create_dir_all(dir.join("import")).unwrap();
    std::fs::write(dir.join("import").join(format!("{name}.txt")), text).unwrap();
}

#[test]
fn record_then_replay_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    seed_import(dir.path(), "f1--claude-2.1--num", "Net sales rose 12% to $72.6 million.\n");
    let gw = Gateway::new(config(dir.path(), 10_000)).unwrap();
    let doc = report("f1");
    let recorded = gw.summarize(&doc, None, "claude-2.1", PromptKind::Num, Mode::Record).unwrap();
    assert_eq!(recorded.summary_text, "Net sales rose 12% to $72.6 million.");
    assert_eq!(recorded.truncated_tokens, 0);

    // Replay needs no provider at all.
    std::fs::remove_dir_all(dir.path().join("import")).unwrap();
    let replayed = gw.summarize(&doc, None, "claude-2.1", PromptKind::Num, Mode::Replay).unwrap();
    let again = gw.summarize(&doc, None, "claude-2.1", PromptKind::Num, Mode::Replay).unwrap();
    assert_eq!(replayed, again);
    assert_eq!(replayed.mode, Mode::Replay);
    let mut normalized = replayed.clone();
    normalized.mode = Mode::Record;
    assert_eq!(normalized, recorded);

    let cassette = CassetteStore::new(dir.path().join("cassettes")).load(&recorded.cassette_key).unwrap();
    assert_eq!(cassette.prompt_kind, PromptKind::Num);
    assert_eq!(cassette.request, json!({"file": "f1--claude-2.1--num.txt"}));
}

#[test]
fn replay_without_cassette_misses() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(config(dir.path(), 10_000)).unwrap();
    let err = gw.summarize(&report("f1"), Some(4), "claude-2.1", PromptKind::Simple, Mode::Replay);
    assert!(matches!(err, Err(GatewayError::CassetteMiss { .. })));
}

#[test]
fn replay_against_a_changed_document_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    seed_import(dir.path(), "f1--claude-2.1--simple", "Sales rose.");
    let gw = Gateway::new(config(dir.path(), 10_000)).unwrap();
    gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Simple, Mode::Record).unwrap();
    let mut edited = report("f1");
    edited.paragraphs.pop();
    let err = gw.summarize(&edited, None, "claude-2.1", PromptKind::Simple, Mode::Replay);
    assert!(matches!(err, Err(GatewayError::CassetteMismatch { .. })));
}

#[test]
fn oversized_prompt_is_rejected_or_truncated() {
    let dir = tempfile::tempdir().unwrap();
    seed_import(dir.path(), "f1--claude-2.1--simple", "Sales rose.");
    let mut gw = Gateway::new(config(dir.path(), 60)).unwrap();
    gw.truncate = false;
    let err = gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Simple, Mode::Live);
    assert!(matches!(err, Err(GatewayError::BudgetExceeded { .. })));
    gw.truncate = true;
    let rec = gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Simple, Mode::Live).unwrap();
    // 60 tokens less 5% and 16 for output leaves 41; the template takes 24,
    // so 12 words of document fit: the first paragraph (10), not the second (12).
    assert_eq!(rec.truncated_tokens, 12);
}

struct Fixed(&'static str);

impl Provider for Fixed {
    fn complete(&self, _: &CompletionRequest<'_>) -> Result<Completion, GatewayError> {
        Ok(Completion {
            text: self.0.to_string(),
            request: Value::Null,
            response: Value::Null,
        })
    }
}

#[test]
fn empty_and_refused_responses_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(config(dir.path(), 10_000)).unwrap().with_provider("local", Box::new(Fixed("")));
    let rec = gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Simple, Mode::Live).unwrap();
    assert!(rec.refused);
    assert_eq!(rec.summary_text, EMPTY_RESPONSE_MARKER);
    let gw = Gateway::new(config(dir.path(), 10_000))
        .unwrap()
        .with_provider("local", Box::new(Fixed("unable to comprehend the table")));
    assert!(gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Simple, Mode::Live).unwrap().refused);
}

#[test]
fn rate_limited_call_honors_retry_after() {
    std::env::set_var("SUMTRACE_TEST_KEY_A", "secret-a");
    let ok = json!({"content": [{"type": "text", "text": "Summary."}]}).to_string();
    let (url, seen) = mock_server(vec![
        (429, vec![("retry-after", "1".into())], "{}".into()),
        (200, vec![], ok),
    ]);
    let provider = HttpProvider::new("anthropic", &provider_config(ProviderKind::Anthropic, &url, "SUMTRACE_TEST_KEY_A", 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let gw = Gateway::new(config(dir.path(), 10_000)).unwrap().with_provider("local", Box::new(provider));
    let start = Instant::now();
    let rec = gw.summarize(&report("f1"), None, "claude-2.1", PromptKind::Cot, Mode::Live).unwrap();
    assert!(start.elapsed() >= Duration::from_secs(1));
    assert_eq!(rec.summary_text, "Summary.");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    let req = &seen[1];
    assert!(req.headers.contains(&("x-api-key".into(), "secret-a".into())));
    assert_eq!(req.body["max_tokens"], 16);
    assert_eq!(req.body["temperature"], 1.0);
    assert!(req.body["messages"][0]["content"].as_str().unwrap().ends_with("\n\nSummary:"));
}

#[test]
fn exhausted_retries_surface_retry_after() {
    std::env::set_var("SUMTRACE_TEST_KEY_B", "secret-b");
    let (url, _) = mock_server(vec![(503, vec![("retry-after", "7".into())], "busy".into())]);
    let provider = HttpProvider::new("openai", &provider_config(ProviderKind::OpenAi, &url, "SUMTRACE_TEST_KEY_B", 0)).unwrap();
    let model = GatewayConfig::from_toml(
        "[providers.openai]\nkind = \"openai\"\n[[models]]\nprovider_id = \"openai\"\nmodel_name = \"gpt-4-1106-preview\"\ncontext_budget_tokens = 128000\nmax_output_tokens = 4096\n",
    )
    .unwrap()
    .models
    .remove(0);
    let req = CompletionRequest {
        filing_id: "f",
        shuffle_seed: None,
        model: &model,
        kind: PromptKind::Simple,
        prompt: "p",
        document_text: "d",
    };
    match provider.complete(&req) {
        Err(GatewayError::Provider { status, retry_after, message, .. }) => {
            assert_eq!(status, Some(503));
            assert_eq!(retry_after, Some(Duration::from_secs(7)));
            assert_eq!(message, "busy");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn client_errors_are_not_retried_and_bodies_match_the_endpoint() {
    std::env::set_var("SUMTRACE_TEST_KEY_C", "secret-c");
    let (url, seen) = mock_server(vec![(400, vec![], "{\"message\":\"bad\"}".into())]);
    let provider = HttpProvider::new("cohere", &provider_config(ProviderKind::Cohere, &url, "SUMTRACE_TEST_KEY_C", 3)).unwrap();
    let model = sumtrace_gateway::ModelConfig {
        provider_id: "cohere".into(),
        model_name: "command".into(),
        context_budget_tokens: 13_300,
        max_output_tokens: 1024,
        temperature: None,
    };
    let req = CompletionRequest {
        filing_id: "f",
        shuffle_seed: None,
        model: &model,
        kind: PromptKind::Simple,
        prompt: "prompt text",
        document_text: "document text",
    };
    assert!(matches!(provider.complete(&req), Err(GatewayError::Provider { status: Some(400), .. })));
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(
        seen[0].body,
        json!({"text": "document text", "model": "command", "length": "long", "format": "bullets",
               "extractiveness": "high", "temperature": 0.3})
    );
    assert!(seen[0].headers.contains(&("authorization".into(), "Bearer secret-c".into())));
}

#[test]
fn missing_key_fails_before_any_request() {
    let p = HttpProvider::new("x", &provider_config(ProviderKind::OpenAi, "http://127.0.0.1:9", "SUMTRACE_TEST_UNSET", 0)).unwrap();
    let model = sumtrace_gateway::ModelConfig {
        provider_id: "x".into(),
        model_name: "m".into(),
        context_budget_tokens: 100,
        max_output_tokens: 1,
        temperature: None,
    };
    let req = CompletionRequest {
        filing_id: "f",
        shuffle_seed: None,
        model: &model,
        kind: PromptKind::Simple,
        prompt: "p",
        document_text: "d",
    };
    assert_eq!(p.complete(&req), Err(GatewayError::MissingApiKey("SUMTRACE_TEST_UNSET".into())));
}

#[test]
fn throttle_bounds_in_flight_requests() {
    let throttle = Arc::new(Throttle::new(3, None));
    let current = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let handles: Vec<_> = (0..12)
        .map(|_| {
            let (t, c, p) = (throttle.clone(), current.clone(), peak.clone());
            std::thread::spawn(move || {
                let _permit = t.acquire();
                let now = c.fetch_add(1, Ordering::SeqCst) + 1;
                p.fetch_max(now, Ordering::SeqCst);
                std::thread::sleep(Duration::from_millis(20));
                c.fetch_sub(1, Ordering::SeqCst);
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert!(peak.load(Ordering::SeqCst) <= 3);
    assert!(peak.load(Ordering::SeqCst) >= 2);
}

#[test]
fn throttle_spaces_request_starts() {
    let throttle = Throttle::new(8, Some(600));
    let start = Instant::now();
    for _ in 0..4 {
        drop(throttle.acquire());
    }
    // 600 per minute is one start per 100 ms; the first goes immediately.
    assert!(start.elapsed() >= Duration::from_millis(300));
}

#[test]
fn concurrent_recording_leaves_one_complete_cassette() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(CassetteStore::new(dir.path()));
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let store = store.clone();
            std::thread::spawn(move || {
                store
                    .save(&Cassette {
                        cassette_key: "k".into(),
                        filing_id: "f".into(),
                        provider_id: "p".into(),
                        model_name: "m".into(),
                        prompt_kind: PromptKind::Simple,
                        shuffle_seed: None,
                        prompt: "x".repeat(10_000),
                        request: Value::Null,
                        response: Value::Null,
                        summary_text: format!("writer {i}"),
                    })
                    .unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let c = store.load("k").unwrap();
    assert!(c.summary_text.starts_with("writer "));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
}
