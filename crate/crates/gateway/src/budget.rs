use serde::{Deserialize, Serialize};
use sumtrace_core::corpus::{tokenize, truncate_to_budget, CorpusError, Document};

use crate::config::{Estimator, ModelConfig};
use crate::prompt::{render_prompt, PromptKind};
use crate::GatewayError;

impl Estimator {
    /// Estimated tokens: words (as the corpus tokenizer counts them) times the ratio, rounded up.
    pub fn tokens(&self, text: &str) -> usize {
        self.tokens_for_words(tokenize(text).len())
    }

    pub fn tokens_for_words(&self, words: usize) -> usize {
        (words as f64 * self.ratio).ceil() as usize
    }

    /// Prompt tokens available to a model after the margin and the output reservation.
    pub fn available(&self, model: &ModelConfig) -> usize {
        let usable = (model.context_budget_tokens as f64 * (1.0 - self.safety_margin)).floor() as usize;
        usable.saturating_sub(model.max_output_tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedPrompt {
    pub prompt: String,
    pub prompt_tokens: usize,
    pub available_tokens: usize,
    /// Words dropped by head-keep truncation; zero when the document fits.
    pub truncated_tokens: usize,
    /// The document actually placed in the prompt.
    #[serde(skip)]
    pub document: Option<Document>,
}

/// Renders `kind` over `doc`, truncating paragraphs from the tail when the
/// estimate exceeds the model's budget. With `truncate = false` an oversized
/// prompt is an error instead.
pub fn prepare_prompt(
    doc: &Document,
    kind: PromptKind,
    model: &ModelConfig,
    estimator: &Estimator,
    truncate: bool,
) -> Result<PreparedPrompt, GatewayError> {
    let available = estimator.available(model);
    let prompt = render_prompt(kind, doc);
    let prompt_tokens = estimator.tokens(&prompt);
    if prompt_tokens <= available {
        return Ok(PreparedPrompt {
            prompt,
            prompt_tokens,
            available_tokens: available,
            truncated_tokens: 0,
            document: Some(doc.clone()),
        });
    }
    let exceeded = GatewayError::BudgetExceeded {
        prompt_tokens,
        available,
    };
    if !truncate {
        return Err(exceeded);
    }
    let (head, tail) = kind.template();
    let template_tokens = estimator.tokens(head) + estimator.tokens(&tail);
    let word_budget = (available.saturating_sub(template_tokens) as f64 / estimator.ratio).floor() as usize;
    let (kept, truncated_tokens) = match truncate_to_budget(doc, word_budget) {
        Ok(t) => t,
        Err(CorpusError::BudgetTooSmall { .. }) => return Err(exceeded),
        Err(e) => return Err(GatewayError::Config(e.to_string())),
    };
    let prompt = render_prompt(kind, &kept);
    let prompt_tokens = estimator.tokens(&prompt);
    if prompt_tokens > available {
        return Err(GatewayError::BudgetExceeded {
            prompt_tokens,
            available,
        });
    }
    Ok(PreparedPrompt {
        prompt,
        prompt_tokens,
        available_tokens: available,
        truncated_tokens,
        document: Some(kept),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sumtrace_core::corpus::{paragraph_token_count, ParagraphBody};

    fn model(budget: usize) -> ModelConfig {
        ModelConfig {
            provider_id: "p".into(),
            model_name: "m".into(),
            context_budget_tokens: budget,
            max_output_tokens: 10,
            temperature: None,
        }
    }

    fn doc(paragraphs: usize, words: usize) -> Document {
        let bodies = (0..paragraphs)
            .map(|p| ParagraphBody::Prose {
                text: (0..words).map(|w| format!("w{p}x{w}")).collect::<Vec<_>>().join(" ") + ".",
            })
            .collect();
        Document::new("d", bodies)
    }

    #[test]
    fn estimate_rounds_up() {
        let e = Estimator::default();
        assert_eq!(e.tokens("one two three"), 4);
        assert_eq!(e.tokens(""), 0);
        assert_eq!(e.available(&model(1000)), 940);
    }

    #[test]
    fn fitting_document_is_untouched() {
        let d = doc(3, 10);
        let p = prepare_prompt(&d, PromptKind::Simple, &model(1000), &Estimator::default(), true).unwrap();
        assert_eq!(p.truncated_tokens, 0);
        assert_eq!(p.prompt, render_prompt(PromptKind::Simple, &d));
    }

    #[test]
    fn truncation_matches_corpus_accounting() {
        let d = doc(10, 30);
        let e = Estimator::default();
        let p = prepare_prompt(&d, PromptKind::Num, &model(200), &e, true).unwrap();
        assert!(p.prompt_tokens <= p.available_tokens);
        let kept = p.document.unwrap();
        let dropped: usize = d.paragraphs[kept.paragraphs.len()..].iter().map(paragraph_token_count).sum();
        assert_eq!(p.truncated_tokens, dropped);
        assert!(p.truncated_tokens > 0);
    }

    #[test]
    fn oversized_prompt_without_truncation() {
        let err = prepare_prompt(&doc(10, 30), PromptKind::Cot, &model(200), &Estimator::default(), false);
        assert!(matches!(err, Err(GatewayError::BudgetExceeded { .. })));
        // A first paragraph larger than the whole budget cannot be truncated into shape.
        let err = prepare_prompt(&doc(1, 400), PromptKind::Simple, &model(200), &Estimator::default(), true);
        assert!(matches!(err, Err(GatewayError::BudgetExceeded { .. })));
    }
}
