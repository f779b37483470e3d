use once_cell::sync::Lazy;
use regex::Regex;

use super::model::{Document, ParagraphBody, Sentence, Span, Token};
use super::stopwords::StopwordList;

/// Number literals (with thousands separators and decimals) or words, where a
/// word may carry internal apostrophes or hyphens ("company-operated", "covid-19").
static TOKEN_RE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"\d+(?:,\d{3})*(?:\.\d+)?|[\p{L}\p{N}]+(?:['’\-][\p{L}\p{N}]+)*")
        .expect("token pattern")
});

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "inc", "corp", "co", "ltd", "llc", "l.p", "lp", "no", "nos", "mr", "mrs", "ms", "dr", "st",
    "jr", "sr", "vs", "v", "e.g", "i.e", "u.s", "u.k", "approx", "est", "dept", "fig", "jan",
    "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "n.a", "s.a",
    "cf", "al", "ref", "sec", "bros",
];

pub fn tokenize(text: &str) -> Vec<Token> {
    TOKEN_RE
        .find_iter(text)
        .map(|m| Token {
            text: m.as_str().to_string(),
            span: Span::new(m.start(), m.end()),
        })
        .collect()
}

/// Whitespace-delimited word count of raw text.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Rule-based sentence boundaries over one paragraph of text.
///
/// A sentence ends at a newline, or at `.`/`!`/`?` (plus closing quotes or
/// brackets) followed by whitespace, unless the period closes a guarded
/// abbreviation or a single-letter initial, or the next word starts lowercase.
/// Spans are trimmed; spans without any token are dropped.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\n' {
            push_trimmed(text, start, i, &mut spans);
            start = i + 1;
        } else if matches!(b, b'.' | b'!' | b'?') {
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end], b'"' | b'\'' | b')' | b']') {
                end += 1;
            }
            // Closing curly quotes are multi-byte.
            while text[end..].starts_with('”') || text[end..].starts_with('’') {
                end += '”'.len_utf8();
            }
            let at_end = end >= bytes.len();
            let followed_by_space = !at_end && text[end..].starts_with(char::is_whitespace);
            if (at_end || followed_by_space) && is_boundary(text, start, i, end) {
                push_trimmed(text, start, end, &mut spans);
                start = end;
                i = end;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(text, start, text.len(), &mut spans);
    spans
}

fn is_boundary(text: &str, sentence_start: usize, term: usize, after: usize) -> bool {
    if text.as_bytes()[term] == b'.' {
        let word_start = text[sentence_start..term]
            .rfind(|c: char| c.is_whitespace() || c == '(')
            .map(|p| sentence_start + p + 1)
            .unwrap_or(sentence_start);
        let word = text[word_start..term].to_lowercase();
        if ABBREVIATIONS.contains(&word.as_str()) {
            return false;
        }
        let mut chars = word.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_alphabetic() {
                return false;
            }
        }
    }
    let next = text[after..].trim_start().chars().next();
    !matches!(next, Some(c) if c.is_lowercase())
}

fn push_trimmed(text: &str, start: usize, end: usize, out: &mut Vec<Span>) {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if trimmed.is_empty() || !TOKEN_RE.is_match(trimmed) {
        return;
    }
    let s = start + lead;
    out.push(Span::new(s, s + trimmed.len()));
}

/// Populate `doc.sentences` from its prose paragraphs.
///
/// Token spans are relative to the owning paragraph text, like sentence spans.
pub fn segment_and_tokenize(mut doc: Document, stopwords: &StopwordList) -> Document {
    let mut sentences = Vec::new();
    for paragraph in &doc.paragraphs {
        let ParagraphBody::Prose { text } = &paragraph.body else {
            continue;
        };
        for span in split_sentences(text) {
            let tokens: Vec<Token> = tokenize(&text[span.start..span.end])
                .into_iter()
                .map(|t| Token {
                    text: t.text,
                    span: t.span.shift(span.start),
                })
                .collect();
            let content_tokens = stopwords.content_tokens(&tokens);
            sentences.push(Sentence {
                index: sentences.len(),
                paragraph_index: paragraph.index,
                char_span: span,
                tokens,
                content_tokens,
            });
        }
    }
    doc.total_content_tokens = sentences.iter().map(|s| s.content_tokens.len()).sum();
    doc.sentences = sentences;
    doc
}
