#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use sumtrace_annotate::{router, AnnotationService};
use sumtrace_core::audit::{tasks_for_summary, AnnotationStore, AnnotationTask, SummaryMeta};
use sumtrace_core::corpus::{segment_and_tokenize, Cell, Document, ParagraphBody, StopwordList, Table};
use sumtrace_core::numerics::NumberIndex;

pub fn report() -> Document {
    let table = Table {
        cells: vec![
            Cell { row: 0, col: 0, raw_text: "Marketplace revenue".into() },
            Cell { row: 0, col: 1, raw_text: "89%".into() },
            Cell { row: 1, col: 0, raw_text: "Net sales".into() },
            Cell { row: 1, col: 1, raw_text: "72,616".into() },
        ],
        preamble: String::new(),
    };
    segment_and_tokenize(
        Document::new(
            "f1",
            vec![
                ParagraphBody::Prose {
                    text: "Revenue was 1,000,000 in fiscal 2021. Operating cash flow rose on higher cash inflows for net working capital.".into(),
                },
                ParagraphBody::Table { table },
                ParagraphBody::Prose {
                    text: "Marketplace revenue represented 89% of total revenue in both 2018 and 2017.".into(),
                },
            ],
        ),
        &StopwordList::english(),
    )
}

/// A summary with `extra` additional numbers beyond the three planted ones.
pub fn tasks(extra: usize) -> Vec<AnnotationTask> {
    let sw = StopwordList::english();
    let report = report();
    let mut text = String::from("Revenue reached 1M in 2021. Marketplace revenue was 89% of revenue. Costs fell 7 points.");
    for i in 0..extra {
        text.push_str(&format!(" Another segment grew {} units.", 100 + i));
    }
    let summary = segment_and_tokenize(Document::from_plain_text("s1", &text), &sw);
    let meta = SummaryMeta {
        summary_id: "f1--claude-2.1--simple".into(),
        filing_id: "f1".into(),
        model: "claude-2.1".into(),
        prompt: "simple".into(),
    };
    tasks_for_summary(1, &meta, &summary, &report, &NumberIndex::build(&report))
}

pub fn service(extra: usize, store: AnnotationStore) -> AnnotationService {
    AnnotationService::new(tasks(extra), [report()], store, Duration::from_secs(600)).unwrap()
}

/// Serves on an ephemeral port from a background runtime; returns the base URL.
pub fn serve(service: AnnotationService, token: Option<String>) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(Arc::new(service), token)).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

pub fn client() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(10)))
        .build()
        .into()
}
