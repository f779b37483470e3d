use serde::{Deserialize, Serialize};

use sumtrace_core::corpus::Document;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    Simple,
    Num,
    Tab,
    NumTab,
    Cot,
}

const HEAD: &str = "Summarize the following report.\n\nMD&A: \n";

const NUM: &str = "Please include specific numeric values and key statistics.";
const TAB: &str = "Please include the numeric values in the tables.";

const COT_STEPS: &str = "Let's generate the summary step by step.

1. Read through the entire MD&A report carefully to understand the context.
2. Identify and extract the key topics and insights discussed in the report.
3. Pay attention to any tables presenting numeric data, such as income statements, balance sheets, or cash flow statements.
4. When including numbers in the summary, ensure they are: 
    a) Explicitly stated values from the original report (do not fabricate numbers).
    b) Stemmed from step-by-step verified calculations.
    c) Correctly rounded.
    d) Appropriately represented with clear context from the original source.
5. Synthesize the extracted information and numbers into a concise summary that flows logically.

Summary:";

impl PromptKind {
    pub const ALL: [PromptKind; 5] = [
        PromptKind::Simple,
        PromptKind::Num,
        PromptKind::Tab,
        PromptKind::NumTab,
        PromptKind::Cot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptKind::Simple => "simple",
            PromptKind::Num => "num",
            PromptKind::Tab => "tab",
            PromptKind::NumTab => "numtab",
            PromptKind::Cot => "cot",
        }
    }

    pub fn parse(name: &str) -> Option<PromptKind> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }

    /// Template text before and after the document slot.
    pub fn template(self) -> (&'static str, String) {
        match self {
            PromptKind::Simple => (
                "Summarize the following report.\n\nMD&A: \n\n---\nThe following is an MD&A report:\n\n",
                "\n\nPlease summarize this report.".to_string(),
            ),
            PromptKind::Num => (HEAD, format!("\n\n{NUM}")),
            PromptKind::Tab => (HEAD, format!("\n\n{TAB}")),
            PromptKind::NumTab => (HEAD, format!("\n\n{NUM} {TAB}")),
            PromptKind::Cot => (HEAD, format!("\n\n{COT_STEPS}")),
        }
    }
}

/// The prompt with `text` in the document slot.
pub fn render_text(kind: PromptKind, text: &str) -> String {
    let (head, tail) = kind.template();
    let mut out = String::with_capacity(head.len() + text.len() + tail.len());
    out.push_str(head);
    out.push_str(text);
    out.push_str(&tail);
    out
}

/// The prompt for a document, rendered as plain text with tables row by row.
pub fn render_prompt(kind: PromptKind, doc: &Document) -> String {
    render_text(kind, &doc.plain_text())
}
