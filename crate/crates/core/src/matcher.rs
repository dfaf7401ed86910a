//! Longest-match phrase lookup over token sequences.

use std::collections::HashMap;

/// Maps token sequences to payloads and answers "what is the longest phrase
/// starting at position `pos`?" queries. Used for gazetteer scans (entity
/// names, class labels, word forms) and the relation-phrase dictionary.
#[derive(Debug, Clone)]
pub(crate) struct PhraseMatcher<T> {
    phrases: HashMap<Vec<String>, T>,
    max_len: usize,
}

impl<T> PhraseMatcher<T> {
    pub fn new() -> Self {
        Self {
            phrases: HashMap::new(),
            max_len: 0,
        }
    }

    pub fn insert(&mut self, key: Vec<String>, value: T) -> &mut T {
        if key.len() > self.max_len {
            self.max_len = key.len();
        }
        self.phrases.entry(key).or_insert(value)
    }

    pub fn get_mut(&mut self, key: &[String]) -> Option<&mut T> {
        self.phrases.get_mut(key)
    }

    /// Longest phrase matching a prefix of `tokens[pos..]`, with its length.
    pub fn longest_match_at(&self, tokens: &[String], pos: usize) -> Option<(usize, &T)> {
        let limit = self.max_len.min(tokens.len().saturating_sub(pos));
        for len in (1..=limit).rev() {
            if let Some(value) = self.phrases.get(&tokens[pos..pos + len]) {
                return Some((len, value));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn prefers_longest_match() {
        let mut m = PhraseMatcher::new();
        m.insert(toks("was born"), 1);
        m.insert(toks("was born in"), 2);
        let t = toks("was born in virginia");
        assert_eq!(m.longest_match_at(&t, 0), Some((3, &2)));
        assert_eq!(m.longest_match_at(&t, 3), None);
    }

    #[test]
    fn match_respects_position() {
        let mut m = PhraseMatcher::new();
        m.insert(toks("west of"), 7);
        let t = toks("built in west of jerusalem");
        assert_eq!(m.longest_match_at(&t, 0), None);
        assert_eq!(m.longest_match_at(&t, 2), Some((2, &7)));
    }
}
