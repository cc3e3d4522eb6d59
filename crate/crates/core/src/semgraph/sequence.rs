//! Triple selection, serialization and encoder-input assembly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::token::{normalize_entity, special, tokenize_text, Token, TokenRole};
use crate::corpus::{ImageTriple, ObjectTriple, SceneGraphRecord};
use crate::error::{Error, Result};

/// How the three segments are framed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// `[s] triples [/s] caption [/s] tweet [/s]`
    #[default]
    Plain,
    /// `[s] [triple] … [/triple] [caption] … [/caption] [tweet] … [/tweet] [/s]`
    Tagged,
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Template::Plain),
            "tagged" => Ok(Template::Tagged),
            other => Err(Error::Config(format!("unknown template {other:?}"))),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Template::Plain => "plain",
            Template::Tagged => "tagged",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectedTriples {
    pub object_object: Vec<ObjectTriple>,
    pub image_object: Vec<ImageTriple>,
}

impl SelectedTriples {
    pub fn len(&self) -> usize {
        self.object_object.len() + self.image_object.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn top_k<T: Clone>(items: &[T], k: usize, score: impl Fn(&T) -> f64) -> Vec<T> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    // stable: equal scores keep input order
    order.sort_by(|&a, &b| score(&items[b]).total_cmp(&score(&items[a])));
    order.into_iter().take(k).map(|i| items[i].clone()).collect()
}

/// Keeps the `k_oo` best object–object and `k_io` best image–object triples.
pub fn select_triples(graph: &SceneGraphRecord, k_oo: usize, k_io: usize) -> SelectedTriples {
    SelectedTriples {
        object_object: top_k(&graph.object_object, k_oo, |t| t.score),
        image_object: top_k(&graph.image_object, k_io, |t| t.score),
    }
}

fn push_words(out: &mut Vec<Token>, text: &str, role: TokenRole, triple: usize) {
    let entity = (role == TokenRole::TripleEntity).then(|| normalize_entity(text));
    for w in tokenize_text(text) {
        let mut t = Token::new(w, role).in_triple(triple);
        t.entity = entity.clone();
        out.push(t);
    }
}

/// Renders triples as `subject , predicate , object` joined by `[ts]`.
///
/// Object–object triples come first, then image–object triples rendered as
/// `[img] , image of , object` with the region id on the `[img]` token.
pub fn serialize_triples(triples: &SelectedTriples) -> Vec<Token> {
    let mut out = Vec::new();
    let mut id = 0;
    let open = |out: &mut Vec<Token>, id: usize| {
        if id > 0 {
            out.push(Token::new(special::TRIPLE_SEP, TokenRole::TripleSeparator));
        }
    };
    for t in &triples.object_object {
        open(&mut out, id);
        push_words(&mut out, &t.subject, TokenRole::TripleEntity, id);
        out.push(Token::special(special::COMMA).in_triple(id));
        push_words(&mut out, &t.predicate, TokenRole::TripleRelation, id);
        out.push(Token::special(special::COMMA).in_triple(id));
        push_words(&mut out, &t.object, TokenRole::TripleEntity, id);
        id += 1;
    }
    for t in &triples.image_object {
        open(&mut out, id);
        let mut img = Token::new(special::IMG, TokenRole::SubImage).in_triple(id);
        img.region_id = Some(t.region_id.clone());
        out.push(img);
        out.push(Token::special(special::COMMA).in_triple(id));
        push_words(&mut out, "image of", TokenRole::TripleRelation, id);
        out.push(Token::special(special::COMMA).in_triple(id));
        push_words(&mut out, &t.object, TokenRole::TripleEntity, id);
        id += 1;
    }
    assign_entity_groups(&mut out);
    out
}

/// Gives every distinct normalized entity string its own group id, in order
/// of first appearance.
pub fn assign_entity_groups(tokens: &mut [Token]) {
    let mut groups: HashMap<String, usize> = HashMap::new();
    for t in tokens.iter_mut() {
        t.entity_group = match (&t.entity, t.role) {
            (Some(e), TokenRole::TripleEntity) => {
                let next = groups.len();
                Some(*groups.entry(e.clone()).or_insert(next))
            }
            _ => None,
        };
    }
}

/// The serialized encoder input.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SemanticSequence {
    pub tokens: Vec<Token>,
}

impl SemanticSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Space-joined surface form.
    pub fn render(&self) -> String {
        self.texts().join(" ")
    }

    /// Positions of the `[img]` tokens.
    pub fn image_positions(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.role == TokenRole::SubImage)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn triple_count(&self) -> usize {
        let mut ids: Vec<usize> = self.tokens.iter().filter_map(|t| t.triple_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Checks the structural invariants; returns the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut groups: HashMap<usize, &str> = HashMap::new();
        let mut group_of: HashMap<&str, usize> = HashMap::new();
        for (i, t) in self.tokens.iter().enumerate() {
            match t.role {
                TokenRole::TripleSeparator if t.triple_id.is_some() => {
                    return Err(format!("token {i}: [ts] carries a triple id"));
                }
                TokenRole::TripleEntity | TokenRole::TripleRelation | TokenRole::SubImage if t.triple_id.is_none() => {
                    return Err(format!("token {i}: triple token without triple id"));
                }
                TokenRole::SubImage if t.region_id.is_none() => {
                    return Err(format!("token {i}: [img] without region id"));
                }
                _ => {}
            }
            if t.role != TokenRole::SubImage && t.region_id.is_some() {
                return Err(format!("token {i}: region id on a non-image token"));
            }
            match (t.role, t.entity_group, t.entity.as_deref()) {
                (TokenRole::TripleEntity, Some(g), Some(e)) => {
                    if let Some(prev) = groups.insert(g, e) {
                        if prev != e {
                            return Err(format!("token {i}: group {g} mixes {prev:?} and {e:?}"));
                        }
                    }
                    if let Some(prev) = group_of.insert(e, g) {
                        if prev != g {
                            return Err(format!("token {i}: entity {e:?} split over groups"));
                        }
                    }
                }
                (TokenRole::TripleEntity, _, _) => {
                    return Err(format!("token {i}: entity token without group"));
                }
                (_, Some(_), _) => return Err(format!("token {i}: group on a non-entity token")),
                _ => {}
            }
        }
        Ok(())
    }
}

fn text_tokens(text: &str, role: TokenRole) -> Vec<Token> {
    tokenize_text(text)
        .into_iter()
        .map(|w| {
            let r = if special::MARKERS.contains(&w.as_str()) {
                TokenRole::Special
            } else {
                role
            };
            Token::new(w, r)
        })
        .collect()
}

/// Frames triples, caption and tweet into one sequence.
///
/// `caption = None` drops the caption segment together with its frame.
pub fn assemble_input(
    triple_tokens: &[Token],
    caption: Option<&str>,
    cleaned_tweet: &str,
    template: Template,
) -> SemanticSequence {
    let mut tokens = Vec::new();
    let sp = Token::special;
    tokens.push(sp(special::BOS));
    match template {
        Template::Plain => {
            tokens.extend_from_slice(triple_tokens);
            tokens.push(sp(special::SEP));
            if let Some(c) = caption {
                tokens.extend(text_tokens(c, TokenRole::Caption));
                tokens.push(sp(special::SEP));
            }
            tokens.extend(text_tokens(cleaned_tweet, TokenRole::Tweet));
            tokens.push(sp(special::SEP));
        }
        Template::Tagged => {
            tokens.push(sp(special::TRIPLE_OPEN));
            tokens.extend_from_slice(triple_tokens);
            tokens.push(sp(special::TRIPLE_CLOSE));
            if let Some(c) = caption {
                tokens.push(sp(special::CAPTION_OPEN));
                tokens.extend(text_tokens(c, TokenRole::Caption));
                tokens.push(sp(special::CAPTION_CLOSE));
            }
            tokens.push(sp(special::TWEET_OPEN));
            tokens.extend(text_tokens(cleaned_tweet, TokenRole::Tweet));
            tokens.push(sp(special::TWEET_CLOSE));
            tokens.push(sp(special::SEP));
        }
    }
    assign_entity_groups(&mut tokens);
    SemanticSequence { tokens }
}

/// Shrinks `seq` to at most `n_max` tokens.
///
/// Whole triples are dropped from the end of the triple segment first (with
/// the `[ts]` before each), then caption tokens from the caption's tail.
/// Tweet and frame tokens are never removed.
pub fn truncate(seq: &SemanticSequence, n_max: usize) -> Result<SemanticSequence> {
    let mut tokens = seq.tokens.clone();
    while tokens.len() > n_max {
        let Some(last) = tokens.iter().filter_map(|t| t.triple_id).max() else {
            break;
        };
        let first = tokens.iter().position(|t| t.triple_id == Some(last)).unwrap();
        let end = tokens.iter().rposition(|t| t.triple_id == Some(last)).unwrap() + 1;
        let start = if first > 0 && tokens[first - 1].role == TokenRole::TripleSeparator {
            first - 1
        } else {
            first
        };
        tokens.drain(start..end);
    }
    while tokens.len() > n_max {
        let Some(pos) = tokens.iter().rposition(|t| t.role == TokenRole::Caption) else {
            break;
        };
        tokens.remove(pos);
    }
    if tokens.len() > n_max {
        return Err(Error::Capacity {
            required: tokens.len(),
            n_max,
        });
    }
    Ok(SemanticSequence { tokens })
}
