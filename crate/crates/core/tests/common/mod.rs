//! Independent reference implementations and fixtures shared by the
//! integration and acceptance tests. Nothing here calls the code under test
//! for the quantity it is meant to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqcsg::corpus::{join_sources, CaptionRecord, ImageTriple, JoinedInstance, Label, ObjectTriple, SplitName};
use seqcsg::model::{AttentionWeights, PreparedInput};
use seqcsg::semgraph::{
    assemble_input, select_triples, serialize_triples, special, SemanticSequence, Template, Token, TokenRole,
    VisibilityMatrix,
};
use seqcsg::synthetic::overfit_corpus;
use seqcsg::tensor::Matrix;

/// Visibility rule evaluated cell by cell from token roles, triple ids and
/// entity strings.
pub fn brute_force_visibility(tokens: &[Token]) -> Vec<Vec<u8>> {
    let global = |t: &Token| {
        matches!(
            t.role,
            TokenRole::Special | TokenRole::TripleSeparator | TokenRole::Caption | TokenRole::Tweet
        )
    };
    let n = tokens.len();
    let mut out = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&tokens[i], &tokens[j]);
            let mut v = i == j;
            if let (Some(x), Some(y)) = (a.triple_id, b.triple_id) {
                v |= x == y;
            }
            v |= global(a) || global(b);
            if a.role == TokenRole::TripleEntity && b.role == TokenRole::TripleEntity {
                if let (Some(x), Some(y)) = (&a.entity, &b.entity) {
                    v |= x == y;
                }
            }
            out[i][j] = v as u8;
        }
    }
    out
}

const ENTITIES: [&str; 5] = ["man", "dog", "red car", "tree", "ball"];
const RELATIONS: [&str; 4] = ["near", "on top of", "holding", "behind"];
const WORDS: [&str; 6] = ["great", "day", "at", "the", "show", "lol"];

/// Random framed sequence with at most four triples and at most 40 tokens.
/// Entities come from a small pool so they are often shared.
pub fn random_sequence(rng: &mut ChaCha8Rng) -> SemanticSequence {
    loop {
        let mut graph = seqcsg::corpus::SceneGraphRecord::empty("img");
        let n_triples = rng.random_range(0..=4);
        let n_oo = rng.random_range(0..=n_triples);
        for _ in 0..n_oo {
            graph.object_object.push(ObjectTriple {
                subject: ENTITIES[rng.random_range(0..ENTITIES.len())].into(),
                predicate: RELATIONS[rng.random_range(0..RELATIONS.len())].into(),
                object: ENTITIES[rng.random_range(0..ENTITIES.len())].into(),
                score: rng.random(),
            });
        }
        for r in 0..n_triples - n_oo {
            graph.image_object.push(ImageTriple {
                region_id: format!("r{r}"),
                object: ENTITIES[rng.random_range(0..ENTITIES.len())].into(),
                score: rng.random(),
            });
        }
        let words = |rng: &mut ChaCha8Rng, n: usize| {
            (0..n)
                .map(|_| WORDS[rng.random_range(0..WORDS.len())])
                .collect::<Vec<_>>()
                .join(" ")
        };
        let caption_len = rng.random_range(1..5);
        let caption = rng.random_bool(0.7).then(|| words(rng, caption_len));
        let tweet_len = rng.random_range(1..5);
        let tweet = format!("[target] Bob [/target] {}", words(rng, tweet_len));
        let template = if rng.random_bool(0.5) {
            Template::Plain
        } else {
            Template::Tagged
        };
        let selected = select_triples(&graph, 4, 4);
        let seq = assemble_input(&serialize_triples(&selected), caption.as_deref(), &tweet, template);
        if seq.len() <= 40 {
            return seq;
        }
    }
}

/// Plain single-matrix attention with no mask: softmax(QKᵀ/√d_h)V per head,
/// concatenated and projected.
pub fn vanilla_attention(h: &Matrix, w: &AttentionWeights, n_heads: usize) -> (Matrix, Vec<Vec<Vec<f64>>>) {
    masked_attention_oracle(h, None, w, n_heads, 0.0)
}

/// Row-by-row attention with explicit loops; masked scores are replaced by
/// `delta`.
pub fn masked_attention_oracle(
    h: &Matrix,
    mask: Option<&VisibilityMatrix>,
    w: &AttentionWeights,
    n_heads: usize,
    delta: f64,
) -> (Matrix, Vec<Vec<Vec<f64>>>) {
    let (n, d) = h.shape();
    let dh = d / n_heads;
    let proj = |wm: &Matrix, b: &Matrix| {
        let mut out = vec![vec![0.0; d]; n];
        for i in 0..n {
            for c in 0..d {
                let mut s = b[(0, c)];
                for k in 0..d {
                    s += h[(i, k)] * wm[(k, c)];
                }
                out[i][c] = s;
            }
        }
        out
    };
    let q = proj(&w.wq, &w.bq);
    let k = proj(&w.wk, &w.bk);
    let v = proj(&w.wv, &w.bv);
    let mut concat = vec![vec![0.0; d]; n];
    let mut probs = Vec::new();
    for head in 0..n_heads {
        let mut hp = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut scores = vec![0.0; n];
            for j in 0..n {
                let mut s = 0.0;
                for c in head * dh..(head + 1) * dh {
                    s += q[i][c] * k[j][c];
                }
                s /= (dh as f64).sqrt();
                if let Some(m) = mask {
                    if !m.get(i, j) {
                        s = delta;
                    }
                }
                scores[j] = s;
            }
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for j in 0..n {
                hp[i][j] = exps[j] / z;
            }
            for c in head * dh..(head + 1) * dh {
                concat[i][c] = (0..n).map(|j| hp[i][j] * v[j][c]).sum();
            }
        }
        probs.push(hp);
    }
    let mut out = Matrix::zeros(n, d);
    for (i, row) in concat.iter().enumerate() {
        for c in 0..d {
            let mut s = w.bo[(0, c)];
            for (k, x) in row.iter().enumerate() {
                s += x * w.wo[(k, c)];
            }
            out.as_mut_slice()[i * d + c] = s;
        }
    }
    (out, probs)
}

/// Per-class F1 averaged without a confusion matrix: counts are taken by
/// scanning the label vectors once per class.
pub fn reference_macro_f1(gold: &[Label], pred: &[Label]) -> (f64, f64) {
    let mut f1_sum = 0.0;
    for class in Label::ALL {
        let tp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == class && **p == class)
            .count() as f64;
        let fp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g != class && **p == class)
            .count() as f64;
        let fneg = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == class && **p != class)
            .count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1_sum += f1;
    }
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64;
    (f1_sum / 3.0, correct / gold.len() as f64)
}

/// The 20-sample overfit corpus joined with its captions and scene graphs.
pub fn overfit_instances() -> (Vec<JoinedInstance>, usize) {
    let corpus = overfit_corpus();
    let split = corpus.split(SplitName::Train).expect("train split").clone();
    let joined = join_sources(&split, &corpus.captions, &corpus.graphs, true).expect("join");
    (joined, corpus.feature_dim)
}

/// Hand-built input: `[s] good [img] day ! [/s]` with one region and the
/// prompt `Bob [mask] .`.
pub fn six_token_input(feature_dim: usize) -> PreparedInput {
    let mut tokens = vec![
        Token::special(special::BOS),
        Token::new("good", TokenRole::Tweet),
        Token::new(special::IMG, TokenRole::SubImage).in_triple(0),
        Token::new("day", TokenRole::Tweet),
        Token::new("!", TokenRole::Tweet),
        Token::special(special::SEP),
    ];
    tokens[2].region_id = Some("r0".into());
    let sequence = SemanticSequence { tokens };
    let visibility = seqcsg::semgraph::build_visibility_matrix(&sequence);
    let feature: Vec<f64> = (0..feature_dim).map(|i| 0.3 * (i as f64 + 1.0).sin()).collect();
    PreparedInput {
        sample_id: "g".into(),
        sequence,
        visibility,
        image_features: vec![(2, feature)],
        prompt: vec!["Bob".into(), special::MASK.into(), ".".into()],
        mask_position: 1,
        label: Some(Label::Neutral),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect(),
    )
}

/// Random symmetric visibility matrix with ones on the diagonal and at least
/// one zero.
pub fn random_mask(rng: &mut ChaCha8Rng, n: usize) -> VisibilityMatrix {
    loop {
        let mut m = VisibilityMatrix::all_ones(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.4) {
                    m.set(i, j, false);
                    m.set(j, i, false);
                }
            }
        }
        if m.zero_count() > 0 {
            return m;
        }
    }
}

pub fn caption(image_id: &str, text: &str) -> CaptionRecord {
    CaptionRecord {
        image_id: image_id.into(),
        caption: text.into(),
    }
}
