use serde::{Deserialize, Serialize};

/// Frame and marker tokens introduced by sequence construction.
pub mod special {
    pub const BOS: &str = "[s]";
    pub const SEP: &str = "[/s]";
    pub const TRIPLE_SEP: &str = "[ts]";
    pub const IMG: &str = "[img]";
    pub const TRIPLE_OPEN: &str = "[triple]";
    pub const TRIPLE_CLOSE: &str = "[/triple]";
    pub const CAPTION_OPEN: &str = "[caption]";
    pub const CAPTION_CLOSE: &str = "[/caption]";
    pub const TWEET_OPEN: &str = "[tweet]";
    pub const TWEET_CLOSE: &str = "[/tweet]";
    pub const TARGET_OPEN: &str = "[target]";
    pub const TARGET_CLOSE: &str = "[/target]";
    pub const MASK: &str = "[mask]";
    pub const COMMA: &str = ",";

    /// Bracketed markers recognised by the text tokenizer.
    pub const MARKERS: [&str; 13] = [
        BOS,
        SEP,
        TRIPLE_SEP,
        IMG,
        TRIPLE_OPEN,
        TRIPLE_CLOSE,
        CAPTION_OPEN,
        CAPTION_CLOSE,
        TWEET_OPEN,
        TWEET_CLOSE,
        TARGET_OPEN,
        TARGET_CLOSE,
        MASK,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenRole {
    TripleEntity,
    TripleRelation,
    /// `[ts]` between serialized triples.
    TripleSeparator,
    SubImage,
    Caption,
    Tweet,
    /// Frame tokens, target markers and the commas inside triples.
    Special,
}

impl TokenRole {
    /// Roles whose tokens see, and are seen by, every other token.
    pub fn is_globally_visible(self) -> bool {
        matches!(
            self,
            TokenRole::Special | TokenRole::TripleSeparator | TokenRole::Caption | TokenRole::Tweet
        )
    }

    pub fn is_triple_part(self) -> bool {
        matches!(
            self,
            TokenRole::TripleEntity | TokenRole::TripleRelation | TokenRole::SubImage
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub role: TokenRole,
    pub triple_id: Option<usize>,
    pub entity_group: Option<usize>,
    /// Normalized text of the entity this token belongs to.
    pub entity: Option<String>,
    pub region_id: Option<String>,
}

impl Token {
    pub fn new(text: impl Into<String>, role: TokenRole) -> Self {
        Self {
            text: text.into(),
            role,
            triple_id: None,
            entity_group: None,
            entity: None,
            region_id: None,
        }
    }

    pub fn special(text: &str) -> Self {
        Self::new(text, TokenRole::Special)
    }

    pub fn in_triple(mut self, id: usize) -> Self {
        self.triple_id = Some(id);
        self
    }
}

/// Lowercased, whitespace-collapsed entity label.
pub fn normalize_entity(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits text into word tokens.
///
/// Whitespace separates chunks; bracketed markers such as `[target]` are kept
/// whole even when glued to neighbouring text; URLs stay single tokens;
/// otherwise runs of alphanumerics (plus `@ # _ '`) form words and any other
/// character stands alone.
pub fn tokenize_text(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if chunk.starts_with("http://") || chunk.starts_with("https://") {
            out.push(chunk.to_string());
            continue;
        }
        let mut rest = chunk;
        let mut word = String::new();
        'outer: while let Some(c) = rest.chars().next() {
            if c == '[' {
                for m in special::MARKERS {
                    if rest.starts_with(m) {
                        if !word.is_empty() {
                            out.push(std::mem::take(&mut word));
                        }
                        out.push(m.to_string());
                        rest = &rest[m.len()..];
                        continue 'outer;
                    }
                }
            }
            if c.is_alphanumeric() || matches!(c, '@' | '#' | '_' | '\'') {
                word.push(c);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            }
            rest = &rest[c.len_utf8()..];
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}
