use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::JoinedInstance;
use crate::semgraph::{special, tokenize_text};

pub const UNK: &str = "[unk]";

/// Tokens every vocabulary starts with, in id order.
pub const RESERVED: [&str; 19] = [
    UNK,
    special::BOS,
    special::SEP,
    special::TRIPLE_SEP,
    special::IMG,
    special::TRIPLE_OPEN,
    special::TRIPLE_CLOSE,
    special::CAPTION_OPEN,
    special::CAPTION_CLOSE,
    special::TWEET_OPEN,
    special::TWEET_CLOSE,
    special::TARGET_OPEN,
    special::TARGET_CLOSE,
    special::MASK,
    special::COMMA,
    "is",
    ".",
    "image",
    "of",
];

/// Word-level vocabulary mapping surface tokens to embedding rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

impl Vocab {
    pub fn reserved_only() -> Self {
        RESERVED.iter().map(|s| s.to_string()).collect::<Vec<_>>().into()
    }

    /// Reserved tokens followed by every token seen at least `min_count`
    /// times in tweets, captions, triples and targets, ordered by
    /// descending frequency then lexically.
    pub fn build<'a>(instances: impl IntoIterator<Item = &'a JoinedInstance>, min_count: usize) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut add = |text: &str| {
            for t in tokenize_text(text) {
                *counts.entry(t).or_default() += 1;
            }
        };
        for inst in instances {
            add(&inst.cleaned_tweet);
            add(&inst.sample.target);
            if let Some(c) = inst.caption_text() {
                add(c);
            }
            for t in &inst.graph.object_object {
                add(&t.subject);
                add(&t.predicate);
                add(&t.object);
            }
            for t in &inst.graph.image_object {
                add(&t.object);
            }
        }
        let mut words: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(w, c)| *c >= min_count && !RESERVED.contains(&w.as_str()))
            .collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        tokens.extend(words.into_iter().map(|(w, _)| w));
        tokens.into()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn ids<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> Vec<usize> {
        tokens.into_iter().map(|t| self.id(t)).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_maps_to_unk_and_reserved_first() {
        let v = Vocab::reserved_only();
        assert_eq!(v.id("[mask]"), RESERVED.iter().position(|t| *t == "[mask]").unwrap());
        assert_eq!(v.id("zebra"), 0);
        assert_eq!(v.token(0), UNK);
    }

    #[test]
    fn serde_as_plain_list() {
        let v = Vocab::reserved_only();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with("[\"[unk]\""));
        let back: Vocab = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
