//! Tokenization resources: stop-word list and surface-to-lemma dictionary.
//!
//! Both are plain data files (one token per line, `surface<TAB>lemma`), with
//! bundled defaults compiled into the crate. Lemmatization is a dictionary
//! lookup that falls back to the identity mapping.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_LEMMAS: &str = include_str!("../data/lemmas.tsv");

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// This is the shared splitting rule for document text, query text, entity
/// names, class labels, and word forms, so that all of them land in the same
/// token space (e.g. "bullet-resistant suit" and "FC Barcelona" both split
/// into plain word tokens).
pub fn tokenize_raw(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Splits text into sentences on `.`, `!` and `?`.
pub fn split_sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Stop-word set plus lemma dictionary.
#[derive(Debug, Clone)]
pub struct Lexicon {
    stopwords: HashSet<String>,
    lemmas: HashMap<String, String>,
}

impl Lexicon {
    /// The dictionaries bundled with the crate.
    pub fn bundled() -> Self {
        Self {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            lemmas: parse_lemmas(DEFAULT_LEMMAS),
        }
    }

    /// Loads stop words and lemmas from the given files.
    pub fn from_files(stopword_path: &Path, lemma_path: &Path) -> io::Result<Self> {
        Ok(Self {
            stopwords: parse_stopwords(&fs::read_to_string(stopword_path)?),
            lemmas: parse_lemmas(&fs::read_to_string(lemma_path)?),
        })
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Dictionary lemma for `token`; the token itself when absent.
    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemmas.get(token).map_or(token, String::as_str)
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::bundled()
    }
}

fn parse_stopwords(data: &str) -> HashSet<String> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn parse_lemmas(data: &str) -> HashMap<String, String> {
    data.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let (surface, lemma) = l.split_once('\t')?;
            Some((surface.trim().to_string(), lemma.trim().to_string()))
        })
        .collect()
}
