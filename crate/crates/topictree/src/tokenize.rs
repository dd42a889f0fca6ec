//! Text to token sequences: case folding, punctuation stripping, stopword
//! and drop-list removal, and a pluggable normalizer.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rust_stemmers::{Algorithm, Stemmer};

use crate::error::{Error, Result};
use crate::ingest::Document;

/// English stopword list shipped with the crate, one word per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Words and phrases dropped regardless of the stopword list.
pub const DEFAULT_DROP_LIST: [&str; 2] = ["copyright", "et al"];

pub const DEFAULT_MIN_LEN: usize = 2;

/// Normalizers are applied until the token stops changing.
const MAX_NORMALIZER_PASSES: usize = 16;

/// Token normalizer supplied by the caller, e.g. a lemmatizer.
pub trait Normalize: Send + Sync {
    fn normalize(&self, token: &str) -> String;
}

#[derive(Clone, Default)]
pub enum Normalizer {
    Identity,
    /// Snowball English stemmer.
    #[default]
    Stemmer,
    Plugin(Arc<dyn Normalize>),
}

impl fmt::Debug for Normalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalizer::Identity => f.write_str("Identity"),
            Normalizer::Stemmer => f.write_str("Stemmer"),
            Normalizer::Plugin(_) => f.write_str("Plugin(..)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum StopwordSource {
    #[default]
    Builtin,
    /// Plain text file, one word per line.
    File(PathBuf),
    Words(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct TokenPipelineConfig {
    pub stopwords: StopwordSource,
    /// Single words or whitespace-separated phrases, matched case-insensitively.
    pub drop_list: Vec<String>,
    pub normalizer: Normalizer,
    /// Shortest token kept, in characters.
    pub min_len: usize,
    pub lowercase: bool,
    pub include_title: bool,
}

impl Default for TokenPipelineConfig {
    fn default() -> Self {
        TokenPipelineConfig {
            stopwords: StopwordSource::Builtin,
            drop_list: DEFAULT_DROP_LIST.iter().map(|s| s.to_string()).collect(),
            normalizer: Normalizer::Stemmer,
            min_len: DEFAULT_MIN_LEN,
            lowercase: true,
            include_title: true,
        }
    }
}

/// Runs of letters, digits and inner hyphens.
fn raw_words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .map(|w| w.trim_matches('-'))
        .filter(|w| !w.is_empty())
}

fn is_numeric(w: &str) -> bool {
    w.chars().all(|c| c.is_numeric() || c == '-')
}

/// Removes every occurrence of every phrase, repeating until none remain.
/// Phrases are lowercase; tokens are compared lowercased.
fn remove_phrases(mut tokens: Vec<String>, phrases: &[Vec<String>]) -> Vec<String> {
    if phrases.is_empty() {
        return tokens;
    }
    loop {
        let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let hit = phrases
                .iter()
                .find(|p| lower.len() - i >= p.len() && lower[i..i + p.len()] == p[..]);
            match hit {
                Some(p) => i += p.len(),
                None => {
                    out.push(std::mem::take(&mut tokens[i]));
                    i += 1;
                }
            }
        }
        let changed = out.len() != lower.len();
        tokens = out;
        if !changed {
            return tokens;
        }
    }
}

/// A compiled [`TokenPipelineConfig`].
pub struct Tokenizer {
    stopwords: HashSet<String>,
    surface_drops: Vec<Vec<String>>,
    normal_drops: Vec<Vec<String>>,
    normalizer: Normalizer,
    stemmer: Stemmer,
    min_len: usize,
    lowercase: bool,
    include_title: bool,
}

impl Tokenizer {
    pub fn new(cfg: &TokenPipelineConfig) -> Result<Self> {
        if cfg.min_len == 0 {
            return Err(Error::Argument("minimum token length must be at least 1".into()));
        }
        let list: Vec<String> = match &cfg.stopwords {
            StopwordSource::Builtin => DEFAULT_STOPWORDS.lines().map(str::to_string).collect(),
            StopwordSource::File(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::io(p, e))?
                .lines()
                .map(str::to_string)
                .collect(),
            StopwordSource::Words(w) => w.clone(),
        };
        let stopwords = list
            .iter()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        let mut tok = Tokenizer {
            stopwords,
            surface_drops: Vec::new(),
            normal_drops: Vec::new(),
            normalizer: cfg.normalizer.clone(),
            stemmer: Stemmer::create(Algorithm::English),
            min_len: cfg.min_len,
            lowercase: cfg.lowercase,
            include_title: cfg.include_title,
        };
        for entry in &cfg.drop_list {
            let lower = entry.to_lowercase();
            let words: Vec<String> = raw_words(&lower).map(str::to_string).collect();
            if words.is_empty() {
                continue;
            }
            let normal: Vec<String> = words.iter().map(|w| tok.normalize(w)).collect();
            if normal.iter().all(|w| !w.is_empty()) {
                tok.normal_drops.push(normal);
            }
            tok.surface_drops.push(words);
        }
        // Longer phrases win when several match at one position.
        tok.surface_drops.sort_by_key(|p| std::cmp::Reverse(p.len()));
        tok.normal_drops.sort_by_key(|p| std::cmp::Reverse(p.len()));
        Ok(tok)
    }

    fn apply(&self, token: &str) -> String {
        match &self.normalizer {
            Normalizer::Identity => token.to_string(),
            Normalizer::Stemmer => self.stemmer.stem(token).into_owned(),
            Normalizer::Plugin(p) => p.normalize(token),
        }
    }

    /// Normalizer applied to a fixpoint, so its output normalizes to itself.
    pub fn normalize(&self, token: &str) -> String {
        let mut cur = token.to_string();
        for _ in 0..MAX_NORMALIZER_PASSES {
            let next = self.apply(&cur).trim_matches('-').to_string();
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(&token.to_lowercase())
    }

    fn keep(&self, token: &str) -> Option<String> {
        if self.is_stopword(token) {
            return None;
        }
        let n = self.normalize(token);
        let ok = !n.is_empty() && !is_numeric(&n) && !self.is_stopword(&n) && n.chars().count() >= self.min_len;
        ok.then_some(n)
    }

    pub fn tokenize_text(&self, text: &str) -> Vec<String> {
        let folded;
        let text = if self.lowercase {
            folded = text.to_lowercase();
            &folded
        } else {
            text
        };
        let raw: Vec<String> = raw_words(text)
            .filter(|w| !is_numeric(w))
            .map(str::to_string)
            .collect();
        let raw = remove_phrases(raw, &self.surface_drops);
        let kept: Vec<String> = raw.iter().filter_map(|w| self.keep(w)).collect();
        remove_phrases(kept, &self.normal_drops)
    }

    /// Tokens of the title (if enabled), abstract and body, in that order.
    pub fn tokenize(&self, doc: &Document) -> Vec<String> {
        let mut text = String::new();
        if self.include_title {
            text.push_str(&doc.title);
            text.push('\n');
        }
        text.push_str(&doc.abstract_text);
        text.push('\n');
        text.push_str(&doc.body);
        self.tokenize_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_tok() -> Tokenizer {
        Tokenizer::new(&TokenPipelineConfig::default()).unwrap()
    }

    #[test]
    fn spec_sentence() {
        assert_eq!(
            default_tok().tokenize_text("The copyright of SARS-CoV viruses."),
            ["sars-cov", "virus"]
        );
    }

    #[test]
    fn drop_phrases_and_empty_input() {
        let t = default_tok();
        assert!(t.tokenize_text("et al et al").is_empty());
        assert!(t.tokenize_text("Et Al. et   al").is_empty());
        assert!(t.tokenize_text("").is_empty());
        // Removing one phrase can expose another.
        assert!(t.tokenize_text("et et al al").is_empty());
    }

    #[test]
    fn numbers_punctuation_and_short_tokens() {
        let t = default_tok();
        assert_eq!(t.tokenize_text("In 2019, 3 x-rays (n=12) -- covid-19!"), ["x-ray", "covid-19"]);
    }

    #[test]
    fn identity_normalizer_keeps_surface_forms() {
        let cfg = TokenPipelineConfig {
            normalizer: Normalizer::Identity,
            ..TokenPipelineConfig::default()
        };
        let t = Tokenizer::new(&cfg).unwrap();
        assert_eq!(t.tokenize_text("Viruses and vaccines"), ["viruses", "vaccines"]);
    }

    #[test]
    fn plugin_normalizer() {
        struct StripS;
        impl Normalize for StripS {
            fn normalize(&self, token: &str) -> String {
                token.trim_end_matches('s').to_string()
            }
        }
        let cfg = TokenPipelineConfig {
            normalizer: Normalizer::Plugin(Arc::new(StripS)),
            ..TokenPipelineConfig::default()
        };
        let t = Tokenizer::new(&cfg).unwrap();
        assert_eq!(t.tokenize_text("cells glass"), ["cell", "gla"]);
    }

    #[test]
    fn title_can_be_excluded() {
        let doc = Document {
            id: "1".into(),
            title: "Influenza".into(),
            abstract_text: "antibody".into(),
            body: "response".into(),
            source: String::new(),
            language: "en".into(),
        };
        // Stemming repeats to a fixpoint: "response" -> "respons" -> "respon".
        assert_eq!(default_tok().tokenize(&doc), ["influenza", "antibodi", "respon"]);
        let cfg = TokenPipelineConfig {
            include_title: false,
            ..TokenPipelineConfig::default()
        };
        assert_eq!(Tokenizer::new(&cfg).unwrap().tokenize(&doc), ["antibodi", "respon"]);
    }

    #[test]
    fn zero_min_len_is_rejected() {
        let cfg = TokenPipelineConfig {
            min_len: 0,
            ..TokenPipelineConfig::default()
        };
        assert!(Tokenizer::new(&cfg).is_err());
    }
}
