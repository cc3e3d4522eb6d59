//! The visibility matrix gating encoder self-attention.

use std::fmt::Write as _;

use super::sequence::SemanticSequence;
use super::token::TokenRole;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Binary `n × n` matrix; cell `(i, j)` is 1 when token `i` may attend to `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMatrix {
    n: usize,
    cells: Vec<u8>,
}

impl VisibilityMatrix {
    pub fn all_ones(n: usize) -> Self {
        Self {
            n,
            cells: vec![1; n * n],
        }
    }

    /// Lower-triangular (causal) visibility.
    pub fn causal(n: usize) -> Self {
        let mut cells = vec![0; n * n];
        for i in 0..n {
            for j in 0..=i {
                cells[i * n + j] = 1;
            }
        }
        Self { n, cells }
    }

    /// Reads a row-major byte block, one byte per cell.
    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != n * n {
            return Err(Error::Contract(format!(
                "{} bytes cannot form a {n}x{n} matrix",
                bytes.len()
            )));
        }
        if let Some(b) = bytes.iter().find(|&&b| b > 1) {
            return Err(Error::Contract(format!("non-binary cell value {b}")));
        }
        Ok(Self {
            n,
            cells: bytes.to_vec(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j] == 1
    }

    pub fn set(&mut self, i: usize, j: usize, visible: bool) {
        self.cells[i * self.n + j] = u8::from(visible);
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.cells
    }

    pub fn zero_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 0).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.cells.iter().all(|&c| c == 1)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.n, self.n, self.cells.iter().map(|&c| f64::from(c)).collect())
    }

    /// Sub-matrix over the given indices (in order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let n = keep.len();
        let mut cells = Vec::with_capacity(n * n);
        for &i in keep {
            for &j in keep {
                cells.push(self.cells[i * self.n + j]);
            }
        }
        Self { n, cells }
    }

    /// One line per row of `0`/`1` characters.
    pub fn to_text_grid(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n + 1));
        for i in 0..self.n {
            for j in 0..self.n {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Grid with a token legend, for eyeballing.
    pub fn to_labelled_grid(&self, seq: &SemanticSequence) -> String {
        let mut s = String::new();
        for (i, t) in seq.tokens.iter().enumerate() {
            let row: String = (0..self.n).map(|j| if self.get(i, j) { '1' } else { '.' }).collect();
            let _ = writeln!(s, "{i:>3} {row} {}", t.text);
        }
        s
    }
}

/// Builds the visibility matrix of `seq`.
///
/// A cell is 1 when the two tokens belong to the same triple, when either
/// is a frame/marker/separator token, when either is a tweet or caption
/// token, when both are entity tokens naming the same entity, or on the
/// diagonal. Everything else is 0.
pub fn build_visibility_matrix(seq: &SemanticSequence) -> VisibilityMatrix {
    let n = seq.len();
    let mut m = VisibilityMatrix {
        n,
        cells: vec![0; n * n],
    };
    for (i, a) in seq.tokens.iter().enumerate() {
        for (j, b) in seq.tokens.iter().enumerate().skip(i) {
            let same_triple = a.triple_id.is_some() && a.triple_id == b.triple_id;
            let global = a.role.is_globally_visible() || b.role.is_globally_visible();
            let shared_entity = a.role == TokenRole::TripleEntity
                && b.role == TokenRole::TripleEntity
                && a.entity_group.is_some()
                && a.entity_group == b.entity_group;
            let visible = i == j || same_triple || global || shared_entity;
            m.set(i, j, visible);
            m.set(j, i, visible);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ImageTriple, ObjectTriple};
    use crate::semgraph::{assemble_input, serialize_triples, SelectedTriples, Template};

    fn example() -> SemanticSequence {
        let sel = SelectedTriples {
            object_object: vec![
                ObjectTriple {
                    subject: "train".into(),
                    predicate: "has".into(),
                    object: "seat".into(),
                    score: 0.9,
                },
                ObjectTriple {
                    subject: "person".into(),
                    predicate: "watching".into(),
                    object: "man".into(),
                    score: 0.8,
                },
            ],
            image_object: vec![ImageTriple {
                region_id: "img_1".into(),
                object: "train".into(),
                score: 0.7,
            }],
        };
        assemble_input(
            &serialize_triples(&sel),
            Some("a train"),
            "[target] X [/target] wow",
            Template::Plain,
        )
    }

    fn find(seq: &SemanticSequence, text: &str, triple: usize) -> usize {
        seq.tokens
            .iter()
            .position(|t| t.text == text && t.triple_id == Some(triple))
            .unwrap()
    }

    #[test]
    fn shared_entity_visible_across_triples() {
        let seq = example();
        let m = build_visibility_matrix(&seq);
        assert!(m.get(find(&seq, "train", 0), find(&seq, "train", 2)));
    }

    #[test]
    fn unrelated_cross_triple_invisible() {
        let seq = example();
        let m = build_visibility_matrix(&seq);
        assert!(!m.get(find(&seq, "has", 0), find(&seq, "person", 1)));
        // entity match does not open the rest of the host triple
        assert!(!m.get(find(&seq, "has", 0), find(&seq, "train", 2)));
    }

    #[test]
    fn tweet_sees_everything() {
        let seq = example();
        let m = build_visibility_matrix(&seq);
        let w = seq.tokens.iter().position(|t| t.text == "wow").unwrap();
        assert!((0..seq.len()).all(|j| m.get(w, j) && m.get(j, w)));
    }

    #[test]
    fn basic_invariants() {
        let m = build_visibility_matrix(&example());
        assert!(m.is_symmetric());
        assert!((0..m.size()).all(|i| m.get(i, i)));
        assert!(m.zero_count() > 0);
    }

    #[test]
    fn no_triples_all_ones() {
        let seq = assemble_input(&[], Some("a cap"), "tweet text", Template::Tagged);
        assert!(build_visibility_matrix(&seq).is_all_ones());
    }

    #[test]
    fn byte_block_round_trip() {
        let m = build_visibility_matrix(&example());
        let back = VisibilityMatrix::from_bytes(m.size(), m.as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(VisibilityMatrix::from_bytes(2, &[1, 2, 0, 1]).is_err());
        assert_eq!(m.to_text_grid().lines().count(), m.size());
    }
}
