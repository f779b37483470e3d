use std::collections::HashSet;

use super::model::Token;

/// English stopword list, version `en-1`.
///
/// The same 179 entries as the NLTK English list, which is what alignment
/// scores are calibrated against.
const ENGLISH_V1: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
];

#[derive(Debug, Clone)]
pub struct StopwordList {
    version: String,
    words: HashSet<String>,
}

impl StopwordList {
    pub fn english() -> Self {
        Self::from_words("en-1", ENGLISH_V1.iter().copied())
    }

    pub fn from_words<'a>(version: &str, words: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            version: version.to_string(),
            words: words.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Expects an already casefolded word.
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    /// Casefold, normalize curly apostrophes, and drop stopwords.
    pub fn content_tokens(&self, tokens: &[Token]) -> Vec<Token> {
        tokens
            .iter()
            .filter_map(|t| {
                let folded = t.text.to_lowercase().replace('’', "'");
                (!self.contains(&folded)).then(|| Token {
                    text: folded,
                    span: t.span,
                })
            })
            .collect()
    }

    /// Content words of free text, for callers without a segmented document.
    pub fn content_words(&self, text: &str) -> Vec<String> {
        self.content_tokens(&super::tokenize(text))
            .into_iter()
            .map(|t| t.text)
            .collect()
    }
}

impl Default for StopwordList {
    fn default() -> Self {
        Self::english()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_list_shape() {
        let list = StopwordList::english();
        assert_eq!(list.len(), 179);
        assert_eq!(list.version(), "en-1");
        assert!(list.contains("other"));
        assert!(!list.contains("million"));
    }

    #[test]
    fn content_words_casefold() {
        let list = StopwordList::english();
        assert_eq!(
            list.content_words("The Company’s revenue IN 2019"),
            ["company's", "revenue", "2019"]
        );
    }
}
